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

#include "diffcore/ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "core/errors.hpp"

namespace pointmask::ad {
namespace {

// Adds the column sums of a row-major [m x d] block to out[d].
void add_col_sums(const double* g, std::size_t m, std::size_t d, double* out) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = g + i * d;
    for (std::size_t j = 0; j < d; ++j) out[j] += row[j];
  }
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using ConstRowVector = Eigen::Map<const Eigen::RowVectorXd>;
using RowVectorMap = Eigen::Map<Eigen::RowVectorXd>;

ConstMatrixMap as_matrix(const Tensor& t) {
  return ConstMatrixMap(t.data(), static_cast<Eigen::Index>(t.rows()),
                        static_cast<Eigen::Index>(t.cols()));
}

MatrixMap as_matrix(Tensor& t) {
  return MatrixMap(t.data(), static_cast<Eigen::Index>(t.rows()),
                   static_cast<Eigen::Index>(t.cols()));
}

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " +
                         shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

// Elementwise op with derivative expressed through input and output values.
template <typename Forward, typename Derivative>
Var unary(const char* name, Var x, Forward forward, Derivative derivative) {
  const Tensor& in = x.value();
  Tensor out = Tensor::uninitialized(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = forward(in[i]);
  return x.tape().record(name, std::move(out), {x},
                         [x, derivative](Tape& tape, const Tensor& y, const Tensor& g) {
                           const Tensor& xv = x.value();
                           if (Tensor* fresh = tape.fresh_grad(x)) {
                             for (std::size_t i = 0; i < g.size(); ++i) {
                               (*fresh)[i] = g[i] * derivative(xv[i], y[i]);
                             }
                             return;
                           }
                           Tensor& gx = tape.grad_of(x);
                           for (std::size_t i = 0; i < g.size(); ++i) {
                             gx[i] += g[i] * derivative(xv[i], y[i]);
                           }
                         });
}

}  // namespace

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix(av, "matmul");
  require_matrix(bv, "matmul");
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul: inner dimensions disagree for " + shape_string(av.shape()) +
                         " x " + shape_string(bv.shape()));
  }
  Tensor out = Tensor::uninitialized({av.rows(), bv.cols()});
  as_matrix(out).noalias() = as_matrix(av) * as_matrix(bv);
  return a.tape().record("matmul", std::move(out), {a, b},
                         [a, b](Tape& tape, const Tensor&, const Tensor& g) {
                           if (tape.requires_grad(a)) {
                             auto ga = as_matrix(g) * as_matrix(b.value()).transpose();
                             if (Tensor* fresh = tape.fresh_grad(a)) {
                               as_matrix(*fresh).noalias() = ga;
                             } else {
                               as_matrix(tape.grad_of(a)).noalias() += ga;
                             }
                           }
                           if (tape.requires_grad(b)) {
                             auto gb = as_matrix(a.value()).transpose() * as_matrix(g);
                             if (Tensor* fresh = tape.fresh_grad(b)) {
                               as_matrix(*fresh).noalias() = gb;
                             } else {
                               as_matrix(tape.grad_of(b)).noalias() += gb;
                             }
                           }
                         });
}

Var linear(Var x, Var weight, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  const Tensor& bv = bias.value();
  require_matrix(xv, "linear");
  require_matrix(wv, "linear");
  if (xv.cols() != wv.rows() || bv.size() != wv.cols()) {
    throw DimensionError("linear: incompatible shapes " + shape_string(xv.shape()) + ", " +
                         shape_string(wv.shape()) + ", " + shape_string(bv.shape()));
  }
  Tensor out = Tensor::uninitialized({xv.rows(), wv.cols()});
  auto om = as_matrix(out);
  om.noalias() = as_matrix(xv) * as_matrix(wv);
  om.rowwise() += ConstRowVector(bv.data(), static_cast<Eigen::Index>(bv.size()));
  return x.tape().record(
      "linear", std::move(out), {x, weight, bias},
      [x, weight, bias](Tape& tape, const Tensor&, const Tensor& g) {
        auto gm = as_matrix(g);
        if (tape.requires_grad(x)) {
          auto gx = gm * as_matrix(weight.value()).transpose();
          if (Tensor* fresh = tape.fresh_grad(x)) {
            as_matrix(*fresh).noalias() = gx;
          } else {
            as_matrix(tape.grad_of(x)).noalias() += gx;
          }
        }
        if (tape.requires_grad(weight)) {
          auto gw = as_matrix(x.value()).transpose() * gm;
          if (Tensor* fresh = tape.fresh_grad(weight)) {
            as_matrix(*fresh).noalias() = gw;
          } else {
            as_matrix(tape.grad_of(weight)).noalias() += gw;
          }
        }
        if (tape.requires_grad(bias)) {
          Tensor& gb = tape.grad_of(bias);
          add_col_sums(g.data(), g.rows(), g.cols(), gb.data());
        }
      });
}

Var transpose(Var x) {
  const Tensor& xv = x.value();
  require_matrix(xv, "transpose");
  Tensor out = Tensor::uninitialized({xv.cols(), xv.rows()});
  as_matrix(out) = as_matrix(xv).transpose();
  return x.tape().record("transpose", std::move(out), {x},
                         [x](Tape& tape, const Tensor&, const Tensor& g) {
                           as_matrix(tape.grad_of(x)) += as_matrix(g).transpose();
                         });
}

Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return x.tape().record("reshape", std::move(out), {x},
                         [x](Tape& tape, const Tensor&, const Tensor& g) {
                           Tensor& gx = tape.grad_of(x);
                           for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                         });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.tape().record("add", std::move(out), {a, b},
                         [a, b](Tape& tape, const Tensor&, const Tensor& g) {
                           for (Var v : {a, b}) {
                             if (!tape.requires_grad(v)) continue;
                             Tensor& gv = tape.grad_of(v);
                             for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
                           }
                         });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return a.tape().record("sub", std::move(out), {a, b},
                         [a, b](Tape& tape, const Tensor&, const Tensor& g) {
                           if (tape.requires_grad(a)) {
                             Tensor& ga = tape.grad_of(a);
                             for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                           }
                           if (tape.requires_grad(b)) {
                             Tensor& gb = tape.grad_of(b);
                             for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                           }
                         });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return a.tape().record("mul", std::move(out), {a, b},
                         [a, b](Tape& tape, const Tensor&, const Tensor& g) {
                           if (tape.requires_grad(a)) {
                             Tensor& ga = tape.grad_of(a);
                             const Tensor& bv = b.value();
                             for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
                           }
                           if (tape.requires_grad(b)) {
                             Tensor& gb = tape.grad_of(b);
                             const Tensor& av = a.value();
                             for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
                           }
                         });
}

Var add_scalar(Var x, double c) {
  return unary("add_scalar", x, [c](double v) { return v + c; },
               [](double, double) { return 1.0; });
}

Var mul_scalar(Var x, double c) {
  return unary("mul_scalar", x, [c](double v) { return v * c; },
               [c](double, double) { return c; });
}

Var add_row(Var x, Var row) {
  const Tensor& xv = x.value();
  const Tensor& rv = row.value();
  require_matrix(xv, "add_row");
  if (rv.size() != xv.cols()) {
    throw DimensionError("add_row: row " + shape_string(rv.shape()) + " does not match " +
                         shape_string(xv.shape()));
  }
  Tensor out = xv;
  as_matrix(out).rowwise() += ConstRowVector(rv.data(), static_cast<Eigen::Index>(rv.size()));
  return x.tape().record("add_row", std::move(out), {x, row},
                         [x, row](Tape& tape, const Tensor&, const Tensor& g) {
                           if (tape.requires_grad(x)) {
                             Tensor& gx = tape.grad_of(x);
                             for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                           }
                           if (tape.requires_grad(row)) {
                             Tensor& gr = tape.grad_of(row);
                             add_col_sums(g.data(), g.rows(), g.cols(), gr.data());
                           }
                         });
}

Var scale_rows(Var x, Var s) {
  const Tensor& xv = x.value();
  const Tensor& sv = s.value();
  require_matrix(xv, "scale_rows");
  if (sv.size() != xv.rows()) {
    throw DimensionError("scale_rows: scale " + shape_string(sv.shape()) +
                         " does not match rows of " + shape_string(xv.shape()));
  }
  const std::size_t m = xv.rows();
  const std::size_t n = xv.cols();
  Tensor out = xv;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) out[r * n + c] *= sv[r];
  }
  return x.tape().record("scale_rows", std::move(out), {x, s},
                         [x, s, m, n](Tape& tape, const Tensor&, const Tensor& g) {
                           if (tape.requires_grad(x)) {
                             Tensor& gx = tape.grad_of(x);
                             const Tensor& sv = s.value();
                             for (std::size_t r = 0; r < m; ++r) {
                               for (std::size_t c = 0; c < n; ++c) {
                                 gx[r * n + c] += g[r * n + c] * sv[r];
                               }
                             }
                           }
                           if (tape.requires_grad(s)) {
                             Tensor& gs = tape.grad_of(s);
                             const Tensor& xv = x.value();
                             for (std::size_t r = 0; r < m; ++r) {
                               double acc = 0.0;
                               for (std::size_t c = 0; c < n; ++c) {
                                 acc += g[r * n + c] * xv[r * n + c];
                               }
                               gs[r] += acc;
                             }
                           }
                         });
}

Var exp(Var x) {
  return unary("exp", x, [](double v) { return std::exp(v); },
               [](double, double y) { return y; });
}

Var log(Var x) {
  return unary("log", x, [](double v) { return std::log(v); },
               [](double v, double) { return 1.0 / v; });
}

Var relu(Var x) {
  return unary("relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var clamp(Var x, double lo, double hi) {
  if (!(lo <= hi)) throw DomainError("clamp: lower bound above upper bound");
  return unary("clamp", x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
               [lo, hi](double v, double) { return (v > lo && v < hi) ? 1.0 : 0.0; });
}

Var sigmoid(Var x) {
  return unary("sigmoid", x, [](double v) { return stable_sigmoid(v); },
               [](double, double y) { return y * (1.0 - y); });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return x.tape().record("sum", Tensor::scalar(total), {x},
                         [x](Tape& tape, const Tensor&, const Tensor& g) {
                           Tensor& gx = tape.grad_of(x);
                           const double gs = g[0];
                           for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gs;
                         });
}

Var mean(Var x) {
  const double n = static_cast<double>(x.value().size());
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return x.tape().record("mean", Tensor::scalar(total / n), {x},
                         [x, n](Tape& tape, const Tensor&, const Tensor& g) {
                           Tensor& gx = tape.grad_of(x);
                           const double gs = g[0] / n;
                           for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gs;
                         });
}

Var row_sum(Var x) {
  const Tensor& xv = x.value();
  require_matrix(xv, "row_sum");
  const std::size_t m = xv.rows();
  const std::size_t n = xv.cols();
  Tensor out({m});
  for (std::size_t r = 0; r < m; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += xv[r * n + c];
    out[r] = acc;
  }
  return x.tape().record("row_sum", std::move(out), {x},
                         [x, m, n](Tape& tape, const Tensor&, const Tensor& g) {
                           Tensor& gx = tape.grad_of(x);
                           for (std::size_t r = 0; r < m; ++r) {
                             for (std::size_t c = 0; c < n; ++c) gx[r * n + c] += g[r];
                           }
                         });
}

Var segment_max(Var x, std::span<const std::size_t> offsets) {
  const Tensor& xv = x.value();
  require_matrix(xv, "segment_max");
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != xv.rows()) {
    throw DimensionError("segment_max: offsets do not partition " + shape_string(xv.shape()));
  }
  const std::size_t segments = offsets.size() - 1;
  const std::size_t d = xv.cols();
  Tensor out({segments, d});
  std::vector<std::size_t> argmax(segments * d);
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t begin = offsets[s];
    const std::size_t end = offsets[s + 1];
    if (end <= begin) throw DomainError("segment_max: empty point segment");
    double* best = out.data() + s * d;
    std::size_t* arg = argmax.data() + s * d;
    const double* first = xv.data() + begin * d;
    std::copy(first, first + d, best);
    std::fill(arg, arg + d, begin);
    for (std::size_t r = begin + 1; r < end; ++r) {
      const double* row = xv.data() + r * d;
      for (std::size_t c = 0; c < d; ++c) {
        // Strict comparison keeps the first occurrence on ties.
        if (row[c] > best[c]) {
          best[c] = row[c];
          arg[c] = r;
        }
      }
    }
  }
  return x.tape().record("segment_max", std::move(out), {x},
                         [x, argmax = std::move(argmax), d](Tape& tape, const Tensor&,
                                                            const Tensor& g) {
                           Tensor& gx = tape.grad_of(x);
                           for (std::size_t i = 0; i < argmax.size(); ++i) {
                             gx[argmax[i] * d + i % d] += g[i];
                           }
                         });
}

Var reduce_max(Var x) {
  const Tensor& xv = x.value();
  require_matrix(xv, "reduce_max");
  const std::size_t offsets[] = {0, xv.rows()};
  return reshape(segment_max(x, offsets), Shape{xv.cols()});
}

Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels) {
  const Tensor& z = logits.value();
  require_matrix(z, "softmax_cross_entropy");
  const std::size_t batch = z.rows();
  const std::size_t classes = z.cols();
  if (labels.size() != batch) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(batch) + " rows");
  }
  Tensor probs({batch, classes});
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    if (labels[b] >= classes) {
      throw IndexError("label " + std::to_string(labels[b]) + " out of range for " +
                       std::to_string(classes) + " classes");
    }
    const double* row = z.data() + b * classes;
    const double peak = *std::max_element(row, row + classes);
    double denom = 0.0;
    for (std::size_t c = 0; c < classes; ++c) denom += std::exp(row[c] - peak);
    const double log_norm = peak + std::log(denom);
    for (std::size_t c = 0; c < classes; ++c) {
      probs[b * classes + c] = std::exp(row[c] - log_norm);
    }
    total += log_norm - row[labels[b]];
  }
  std::vector<std::size_t> targets(labels.begin(), labels.end());
  return logits.tape().record(
      "softmax_cross_entropy", Tensor::scalar(total / static_cast<double>(batch)), {logits},
      [logits, probs = std::move(probs), targets = std::move(targets), batch, classes](
          Tape& tape, const Tensor&, const Tensor& g) {
        Tensor& gz = tape.grad_of(logits);
        const double scale = g[0] / static_cast<double>(batch);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t c = 0; c < classes; ++c) {
            const double onehot = c == targets[b] ? 1.0 : 0.0;
            gz[b * classes + c] += scale * (probs[b * classes + c] - onehot);
          }
        }
      });
}

Var softmax_cross_entropy(Var logits, std::size_t label) {
  const Tensor& z = logits.value();
  if (z.rank() != 1) {
    throw DimensionError("softmax_cross_entropy: expected logits [C], got " +
                         shape_string(z.shape()));
  }
  const std::size_t labels[] = {label};
  return softmax_cross_entropy(reshape(logits, Shape{1, z.size()}), labels);
}

namespace {

Var batch_norm_impl(Var x, Var scale, Var shift, const Tensor* fixed_mean,
                    const Tensor* fixed_var, double epsilon, Tensor* batch_mean,
                    Tensor* batch_var) {
  const bool training = fixed_mean == nullptr;
  const Tensor& xv = x.value();
  require_matrix(xv, "batch_norm");
  const std::size_t m = xv.rows();
  const std::size_t d = xv.cols();
  const Tensor& gamma = scale.value();
  const Tensor& beta = shift.value();
  if (gamma.size() != d || beta.size() != d ||
      (!training && (fixed_mean->size() != d || fixed_var->size() != d))) {
    throw DimensionError("batch_norm: parameter width does not match " +
                         shape_string(xv.shape()));
  }
  if (!(epsilon > 0.0)) throw DomainError("batch_norm: epsilon must be positive");
  const double* xp = xv.data();
  std::vector<double> mu(d, 0.0);
  std::vector<double> var(d, 0.0);
  if (training) {
    const double inv_m = 1.0 / static_cast<double>(m);
    add_col_sums(xp, m, d, mu.data());
    for (double& v : mu) v *= inv_m;
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = xp + i * d;
      for (std::size_t j = 0; j < d; ++j) {
        const double c = row[j] - mu[j];
        var[j] += c * c;
      }
    }
    for (double& v : var) v *= inv_m;
    if (batch_mean) *batch_mean = Tensor({d}, std::vector<double>(mu));
    if (batch_var) *batch_var = Tensor({d}, std::vector<double>(var));
  } else {
    std::copy(fixed_mean->data(), fixed_mean->data() + d, mu.begin());
    std::copy(fixed_var->data(), fixed_var->data() + d, var.begin());
  }
  std::vector<double> inv_std(d);
  for (std::size_t j = 0; j < d; ++j) inv_std[j] = 1.0 / std::sqrt(var[j] + epsilon);
  Tensor xhat = Tensor::uninitialized({m, d});
  Tensor out = Tensor::uninitialized({m, d});
  {
    const double* gp = gamma.data();
    const double* bp = beta.data();
    double* hp = xhat.data();
    double* op = out.data();
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = xp + i * d;
      double* hrow = hp + i * d;
      double* orow = op + i * d;
      for (std::size_t j = 0; j < d; ++j) {
        const double h = (row[j] - mu[j]) * inv_std[j];
        hrow[j] = h;
        orow[j] = h * gp[j] + bp[j];
      }
    }
  }

  return x.tape().record(
      "batch_norm", std::move(out), {x, scale, shift},
      [x, scale, shift, xhat = std::move(xhat), inv_std = std::move(inv_std), training, m, d](
          Tape& tape, const Tensor&, const Tensor& g) {
        const double* gp = g.data();
        const double* hp = xhat.data();
        std::vector<double> g_sum(d, 0.0);
        std::vector<double> gh_sum(d, 0.0);
        add_col_sums(gp, m, d, g_sum.data());
        for (std::size_t i = 0; i < m; ++i) {
          const double* grow = gp + i * d;
          const double* hrow = hp + i * d;
          for (std::size_t j = 0; j < d; ++j) gh_sum[j] += grow[j] * hrow[j];
        }
        if (tape.requires_grad(shift)) {
          Tensor& gb = tape.grad_of(shift);
          for (std::size_t j = 0; j < d; ++j) gb[j] += g_sum[j];
        }
        if (tape.requires_grad(scale)) {
          Tensor& gg = tape.grad_of(scale);
          for (std::size_t j = 0; j < d; ++j) gg[j] += gh_sum[j];
        }
        if (!tape.requires_grad(x)) return;
        const double* gamma = scale.value().data();
        std::vector<double> gamma_inv(d);
        for (std::size_t j = 0; j < d; ++j) gamma_inv[j] = gamma[j] * inv_std[j];
        // dx = gamma * inv_std / m * (m * g - sum(g) - xhat * sum(g * xhat))
        std::vector<double> g_mean(d, 0.0);
        std::vector<double> gh_mean(d, 0.0);
        if (training) {
          const double inv_m = 1.0 / static_cast<double>(m);
          for (std::size_t j = 0; j < d; ++j) {
            g_mean[j] = g_sum[j] * inv_m;
            gh_mean[j] = gh_sum[j] * inv_m;
          }
        }
        Tensor* fresh = tape.fresh_grad(x);
        double* dxp = fresh ? fresh->data() : tape.grad_of(x).data();
        for (std::size_t i = 0; i < m; ++i) {
          const double* grow = gp + i * d;
          const double* hrow = hp + i * d;
          double* drow = dxp + i * d;
          if (fresh) {
            for (std::size_t j = 0; j < d; ++j)
              drow[j] = (grow[j] - g_mean[j] - hrow[j] * gh_mean[j]) * gamma_inv[j];
          } else {
            for (std::size_t j = 0; j < d; ++j)
              drow[j] += (grow[j] - g_mean[j] - hrow[j] * gh_mean[j]) * gamma_inv[j];
          }
        }
      });
}

}  // namespace

Var batch_norm_train(Var x, Var scale, Var shift, double epsilon, Tensor* batch_mean,
                     Tensor* batch_var) {
  return batch_norm_impl(x, scale, shift, nullptr, nullptr, epsilon, batch_mean, batch_var);
}

Var batch_norm_eval(Var x, Var scale, Var shift, const Tensor& mean, const Tensor& var,
                    double epsilon) {
  return batch_norm_impl(x, scale, shift, &mean, &var, epsilon, nullptr, nullptr);
}

}  // namespace pointmask::ad
