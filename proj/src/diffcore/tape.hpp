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

#ifndef POINTMASK_DIFFCORE_TAPE_HPP_
#define POINTMASK_DIFFCORE_TAPE_HPP_

#include <cstddef>
#include <deque>
#include <functional>
#include <string_view>
#include <vector>

#include "diffcore/tensor.hpp"

namespace pointmask::ad {

class Tape;

/// Handle to a tensor recorded on a tape. Cheap to copy; valid while the
/// owning tape is alive.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  /// Gradient accumulated by the last backward pass. Zero-filled when no
  /// gradient reached this node.
  Tensor grad() const;
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Receives the output value and its upstream gradient; accumulates into the
/// inputs through Tape::grad_of.
using BackwardFn =
    std::function<void(Tape& tape, const Tensor& out, const Tensor& grad_out)>;

/// Append-only record of a forward computation. Nodes are stored in creation
/// order, which is a topological order by construction, so backward is a
/// single reverse sweep.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives gradient.
  Var constant(Tensor value);
  /// Leaf whose gradient is tracked.
  Var variable(Tensor value);

  /// Records an op output. The node tracks gradient iff any input does; the
  /// backward rule is dropped otherwise.
  Var record(std::string_view op, Tensor value, std::initializer_list<Var> inputs,
             BackwardFn backward);

  /// Seeds d loss / d loss = 1 and sweeps the tape in reverse.
  void backward(Var loss);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

  /// Gradient accumulator of an input, allocated lazily. Only valid to call
  /// from a backward rule on an input that requires grad.
  Tensor& grad_of(Var v);
  /// Uninitialized gradient buffer when nothing has reached `v` yet, letting a
  /// backward rule assign instead of accumulate; null otherwise.
  Tensor* fresh_grad(Var v);

  /// Accumulated gradient or zeros when nothing reached the node.
  Tensor grad(std::size_t id) const;

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(Tensor value, bool requires_grad, BackwardFn backward);

  // A deque keeps value() references valid while more nodes are recorded.
  std::deque<Node> nodes_;
};

}  // namespace pointmask::ad

#endif  // POINTMASK_DIFFCORE_TAPE_HPP_
