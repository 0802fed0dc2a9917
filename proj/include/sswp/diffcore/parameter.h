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

#ifndef SSWP_DIFFCORE_PARAMETER_H_
#define SSWP_DIFFCORE_PARAMETER_H_

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sswp/diffcore/tensor.h"

namespace sswp::diff {

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  bool trainable = true;
};

// Named parameter collection. Iteration follows insertion order so that
// checkpoints and optimizer updates are deterministic.
template <typename T>
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  Parameter<T>& add(const std::string& name, Tensor<T> value);
  // Glorot-uniform matrix.
  Parameter<T>& add_glorot(const std::string& name, int rows, int cols,
                           std::mt19937_64& rng);
  Parameter<T>& add_normal(const std::string& name, std::vector<int> dims,
                           T stddev, std::mt19937_64& rng);
  Parameter<T>& add_const(const std::string& name, std::vector<int> dims, T v);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Parameter<T>& get(const std::string& name);
  const Parameter<T>& get(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  std::size_t num_values() const;

  // Copies values for every name present in both stores. Shapes must match;
  // mismatches are collected and reported together.
  std::vector<std::string> load_matching(const ParamStore& src,
                                         const std::string& prefix = "");

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& p : params_) {
      auto& q = out.add(p->name, p->value.template cast<U>());
      q.trainable = p->trainable;
    }
    return out;
  }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::map<std::string, std::size_t> index_;
};

extern template class ParamStore<float>;
extern template class ParamStore<double>;

}  // namespace sswp::diff

#endif  // SSWP_DIFFCORE_PARAMETER_H_
