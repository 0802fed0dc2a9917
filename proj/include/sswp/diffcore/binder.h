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

#ifndef SSWP_DIFFCORE_BINDER_H_
#define SSWP_DIFFCORE_BINDER_H_

#include <string>
#include <unordered_map>
#include <vector>

#include "sswp/diffcore/graph.h"

namespace sswp::diff {

// Resolves parameter names to graph leaves, once per name per graph.
// A const store binds every parameter as a constant, which makes
// forward passes over a shared store safe to run concurrently.
// Names starting with a frozen prefix are bound as constants as well.
template <typename T>
class Binder {
 public:
  Binder(Graph<T>& g, ParamStore<T>& ps) : g_(g), mutable_(&ps), const_(&ps) {}
  Binder(Graph<T>& g, const ParamStore<T>& ps) : g_(g), const_(&ps) {}

  void freeze_prefix(std::string prefix) { frozen_.push_back(std::move(prefix)); }

  Expr<T> operator()(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    Expr<T> e;
    if (mutable_ != nullptr && !frozen(name)) {
      e = g_.param(mutable_->get(name));
    } else {
      e = g_.constant(const_->get(name).value);
    }
    cache_.emplace(name, e);
    return e;
  }

  Graph<T>& graph() { return g_; }
  const ParamStore<T>& store() const { return *const_; }

 private:
  bool frozen(const std::string& name) const {
    for (const auto& p : frozen_) {
      if (name.rfind(p, 0) == 0) return true;
    }
    return false;
  }

  Graph<T>& g_;
  ParamStore<T>* mutable_ = nullptr;
  const ParamStore<T>* const_;
  std::vector<std::string> frozen_;
  std::unordered_map<std::string, Expr<T>> cache_;
};

}  // namespace sswp::diff

#endif  // SSWP_DIFFCORE_BINDER_H_
