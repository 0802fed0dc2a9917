// Copyright (c) 2026 The sswp-prosody Authors
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

#include "sswp/diffcore/graph.h"

#include "sswp/common/error.h"

namespace sswp::diff {

namespace testing {

namespace {
std::string& fault_slot() {
  static std::string op;
  return op;
}
}  // namespace

void set_backward_fault(std::string op) { fault_slot() = std::move(op); }
const std::string& backward_fault() { return fault_slot(); }

}  // namespace testing

template <typename T>
Expr<T> Graph<T>::constant(Tensor<T> v) {
  Node n;
  n.op = "constant";
  n.value = std::move(v);
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Expr<T> Graph<T>::variable(Tensor<T> v) {
  Node n;
  n.op = "variable";
  n.value = std::move(v);
  n.needs_grad = record_;
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Expr<T> Graph<T>::param(Parameter<T>& p) {
  Node n;
  n.op = "parameter";
  n.value = p.value;
  n.param = &p;
  n.needs_grad = record_ && p.trainable;
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Expr<T> Graph<T>::push(std::string_view op, Tensor<T> value,
                       std::vector<int> args, BackwardFn fn) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  if (record_) {
    for (int a : args) n.needs_grad = n.needs_grad || nodes_[a].needs_grad;
    if (n.needs_grad) n.backward = std::move(fn);
  }
  n.args = std::move(args);
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Tensor<T>& Graph<T>::accum(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor<T>(n.value.dims());
  return n.grad;
}

template <typename T>
std::vector<std::string_view> Graph<T>::trace() const {
  std::vector<std::string_view> ops;
  ops.reserve(nodes_.size());
  for (const auto& n : nodes_) ops.push_back(n.op);
  return ops;
}

template <typename T>
void Graph<T>::backward(Expr<T> loss) {
  if (!record_) throw Error("backward: graph was built without recording");
  if (loss.graph != this) throw Error("backward: loss belongs to another graph");
  const Tensor<T>& lv = nodes_[loss.id].value;
  if (lv.size() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " + lv.shape_string());
  }
  for (auto& n : nodes_) n.grad = Tensor<T>();
  accum(loss.id).fill(T(1));
  const std::string& fault = testing::backward_fault();
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.param != nullptr) {
      auto g = n.param->grad.data();
      auto src = n.grad.data();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += src[i];
      continue;
    }
    if (!n.backward) continue;
    if (!fault.empty() && n.op == fault) {
      for (auto& v : n.grad.data()) v *= T(1.5);
    }
    n.backward(*this, id);
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace sswp::diff
