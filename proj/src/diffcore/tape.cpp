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

#include "diffcore/tape.hpp"

#include <string>
#include <utility>

#include "core/errors.hpp"

namespace pointmask::ad {

const Tensor& Var::value() const { return tape_->value(id_); }
Tensor Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::push(Tensor value, bool requires_grad, BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), Tensor{}, false, requires_grad,
                        std::move(backward)});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) { return push(std::move(value), false, {}); }

Var Tape::variable(Tensor value) { return push(std::move(value), true, {}); }

Var Tape::record(std::string_view op, Tensor value,
                 std::initializer_list<Var> inputs, BackwardFn backward) {
#ifndef NDEBUG
  bool inputs_finite = true;
  for (const Var& in : inputs) inputs_finite = inputs_finite && in.value().all_finite();
  if (inputs_finite && !value.all_finite()) {
    throw DomainError("non-finite output from " + std::string(op) +
                      " on finite inputs");
  }
#else
  (void)op;
#endif
  bool needs = false;
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw ContractError("op input belongs to another tape");
    needs = needs || nodes_[in.id()].requires_grad;
  }
  return push(std::move(value), needs, needs ? std::move(backward) : BackwardFn{});
}

Tensor& Tape::grad_of(Var v) {
  Node& node = nodes_[v.id()];
  if (!node.has_grad) {
    node.grad = Tensor(node.value.shape(), 0.0);
    node.has_grad = true;
  }
  return node.grad;
}

Tensor* Tape::fresh_grad(Var v) {
  Node& node = nodes_[v.id()];
  if (node.has_grad) return nullptr;
  node.grad = Tensor::uninitialized(node.value.shape());
  node.has_grad = true;
  return &node.grad;
}

Tensor Tape::grad(std::size_t id) const {
  const Node& node = nodes_[id];
  return node.has_grad ? node.grad : Tensor(node.value.shape(), 0.0);
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw ContractError("loss belongs to another tape");
  if (loss.value().size() != 1) {
    throw ContractError("backward needs a scalar loss, got " +
                        shape_string(loss.value().shape()));
  }
  for (Node& node : nodes_) {
    node.has_grad = false;
    node.grad = Tensor{};
  }
  if (!nodes_[loss.id()].requires_grad) return;
  grad_of(loss).fill(1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.has_grad || !node.backward) continue;
    node.backward(*this, node.value, node.grad);
  }
}

}  // namespace pointmask::ad
