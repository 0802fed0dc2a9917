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

#include "sswp/diffcore/parameter.h"

#include <cmath>

#include "sswp/common/error.h"

namespace sswp::diff {

template <typename T>
Parameter<T>& ParamStore<T>::add(const std::string& name, Tensor<T> value) {
  if (contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  auto p = std::make_unique<Parameter<T>>();
  p->name = name;
  p->grad = Tensor<T>(value.dims());
  p->value = std::move(value);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

template <typename T>
Parameter<T>& ParamStore<T>::add_glorot(const std::string& name, int rows,
                                        int cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor<T> t = Tensor<T>::matrix(rows, cols);
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return add(name, std::move(t));
}

template <typename T>
Parameter<T>& ParamStore<T>::add_normal(const std::string& name,
                                        std::vector<int> dims, T stddev,
                                        std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, static_cast<double>(stddev));
  Tensor<T> t(std::move(dims));
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return add(name, std::move(t));
}

template <typename T>
Parameter<T>& ParamStore<T>::add_const(const std::string& name,
                                       std::vector<int> dims, T v) {
  return add(name, Tensor<T>(std::move(dims), v));
}

template <typename T>
Parameter<T>& ParamStore<T>::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw CheckpointError("no parameter named '" + name + "'");
  return *params_[it->second];
}

template <typename T>
const Parameter<T>& ParamStore<T>::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw CheckpointError("no parameter named '" + name + "'");
  return *params_[it->second];
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& p : params_) p->grad.fill(T(0));
}

template <typename T>
std::size_t ParamStore<T>::num_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

template <typename T>
std::vector<std::string> ParamStore<T>::load_matching(const ParamStore& src,
                                                      const std::string& prefix) {
  std::vector<std::string> mismatched;
  for (auto& p : params_) {
    if (!prefix.empty() && p->name.rfind(prefix, 0) != 0) continue;
    if (!src.contains(p->name)) continue;
    const auto& q = src.get(p->name);
    if (q.value.dims() != p->value.dims()) {
      mismatched.push_back(p->name + " (expected " + p->value.shape_string() +
                           ", checkpoint has " + q.value.shape_string() + ")");
      continue;
    }
    p->value = q.value;
  }
  return mismatched;
}

template class ParamStore<float>;
template class ParamStore<double>;

}  // namespace sswp::diff
