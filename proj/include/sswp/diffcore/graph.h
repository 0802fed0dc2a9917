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

#ifndef SSWP_DIFFCORE_GRAPH_H_
#define SSWP_DIFFCORE_GRAPH_H_

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "sswp/diffcore/parameter.h"
#include "sswp/diffcore/tensor.h"

namespace sswp::diff {

template <typename T>
class Graph;

// Handle to a node in a Graph. Cheap to copy; valid while the graph lives.
template <typename T>
struct Expr {
  Graph<T>* graph = nullptr;
  int id = -1;

  const Tensor<T>& value() const { return graph->value(id); }
  int rows() const { return value().rows(); }
  int cols() const { return value().cols(); }
};

// Tape of a single forward pass. Nodes are appended in evaluation order, so
// creation order is a topological order and backward simply walks it in
// reverse. Parameter leaves accumulate their gradient into Parameter::grad.
template <typename T>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int)>;

  explicit Graph(bool record = true) : record_(record) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Expr<T> constant(Tensor<T> v);
  Expr<T> variable(Tensor<T> v);
  Expr<T> param(Parameter<T>& p);

  // Appends an op node. `fn` receives the graph and the new node's id; it is
  // only stored when recording and some argument needs a gradient.
  Expr<T> push(std::string_view op, Tensor<T> value, std::vector<int> args,
               BackwardFn fn);

  const Tensor<T>& value(int id) const { return nodes_[id].value; }
  // Gradient of the last backward() with respect to node `id`; zeros when
  // the node did not contribute to the loss.
  const Tensor<T>& grad(int id) { return accum(id); }
  // Mutable gradient buffer of node `id`, zero-initialized on first use.
  Tensor<T>& accum(int id);
  const Tensor<T>& upstream(int id) const { return nodes_[id].grad; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  std::string_view op_name(int id) const { return nodes_[id].op; }
  std::vector<std::string_view> trace() const;
  std::size_t size() const { return nodes_.size(); }
  bool recording() const { return record_; }

  // Reverse-mode sweep from a scalar loss. Nodes are visited in exact
  // reverse creation order.
  void backward(Expr<T> loss);

 private:
  struct Node {
    std::string_view op;
    Tensor<T> value;
    Tensor<T> grad;
    std::vector<int> args;
    Parameter<T>* param = nullptr;
    bool needs_grad = false;
    BackwardFn backward;
  };

  bool record_;
  std::vector<Node> nodes_;
};

namespace testing {
// Scales the upstream gradient seen by every backward rule of `op` by 1.5,
// simulating a broken derivative. Empty string disables. Test use only.
void set_backward_fault(std::string op);
const std::string& backward_fault();
}  // namespace testing

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace sswp::diff

#endif  // SSWP_DIFFCORE_GRAPH_H_
