// Copyright 2026 The PointMask Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POINTMASK_DIFFCORE_OPS_HPP_
#define POINTMASK_DIFFCORE_OPS_HPP_

#include <cstddef>
#include <span>

#include "diffcore/tape.hpp"
#include "diffcore/tensor.hpp"

// Differentiable operations. Every op records its output on the tape of its
// first input; all inputs must share that tape.
namespace pointmask::ad {

// Matrix products. Rank-2 operands only.
Var matmul(Var a, Var b);
/// x * weight + bias, with bias broadcast over rows.
Var linear(Var x, Var weight, Var bias);
Var transpose(Var x);
Var reshape(Var x, Shape shape);

// Elementwise binary ops over identical shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);

Var add_scalar(Var x, double c);
Var mul_scalar(Var x, double c);
/// x[m x n] + row[n] broadcast over rows.
Var add_row(Var x, Var row);
/// Row i of x[m x n] multiplied by s[i].
Var scale_rows(Var x, Var s);

Var exp(Var x);
Var log(Var x);
Var relu(Var x);
/// Gradient passes strictly inside (lo, hi); zero on and beyond the bounds.
Var clamp(Var x, double lo, double hi);
Var sigmoid(Var x);

Var sum(Var x);
Var mean(Var x);
/// Sum over the last axis of a matrix: [m x n] -> [m].
Var row_sum(Var x);

/// Column-wise maximum of x[n x d] -> [d]. Gradient goes to the first
/// maximal row of each column.
Var reduce_max(Var x);
/// Column-wise maximum within each row segment [offsets[s], offsets[s+1]);
/// x[N x d] -> [S x d].
Var segment_max(Var x, std::span<const std::size_t> offsets);

/// -log softmax(logits)[label] for logits of shape [C].
Var softmax_cross_entropy(Var logits, std::size_t label);
/// Batch mean of the per-row cross-entropy for logits [B x C].
Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels);

/// Per-column batch normalization of x[m x d] with the batch statistics.
/// When non-null, `batch_mean` and `batch_var` receive the column mean and
/// the biased column variance so the caller can maintain running buffers.
Var batch_norm_train(Var x, Var scale, Var shift, double epsilon, Tensor* batch_mean = nullptr,
                     Tensor* batch_var = nullptr);
/// Per-column normalization of x[m x d] with fixed statistics.
Var batch_norm_eval(Var x, Var scale, Var shift, const Tensor& mean, const Tensor& var,
                    double epsilon);

/// Numerically stable scalar logistic function.
double stable_sigmoid(double x);

}  // namespace pointmask::ad

#endif  // POINTMASK_DIFFCORE_OPS_HPP_
