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

#include "sswp/diffcore/tensor.h"

#include <algorithm>
#include <functional>
#include <numeric>

#include "sswp/common/error.h"

namespace sswp::diff {

std::string dims_string(const std::vector<int>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

namespace {

std::size_t checked_count(const std::vector<int>& dims) {
  if (dims.empty()) throw ShapeError("tensor: empty shape");
  std::size_t n = 1;
  for (int d : dims) {
    if (d < 1) throw ShapeError("tensor: non-positive dimension in " + dims_string(dims));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace

template <typename T>
Tensor<T>::Tensor(std::vector<int> dims, T fill)
    : dims_(std::move(dims)), data_(checked_count(dims_), fill) {}

template <typename T>
Tensor<T>::Tensor(std::vector<int> dims, const std::vector<T>& data)
    : Tensor(std::move(dims), Storage(data.begin(), data.end())) {}

template <typename T>
Tensor<T>::Tensor(std::vector<int> dims, Storage data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (checked_count(dims_) != data_.size()) {
    throw ShapeError("tensor: shape " + dims_string(dims_) + " holds " +
                     std::to_string(checked_count(dims_)) + " values, got " +
                     std::to_string(data_.size()));
  }
}

template <typename T>
int Tensor<T>::rows() const {
  if (dims_.empty()) return 0;
  int r = 1;
  for (std::size_t i = 0; i + 1 < dims_.size(); ++i) r *= dims_[i];
  return r;
}

template <typename T>
T Tensor<T>::item() const {
  if (data_.size() != 1) {
    throw ShapeError("tensor: item() on shape " + shape_string());
  }
  return data_[0];
}

template <typename T>
void Tensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <typename T>
std::string Tensor<T>::shape_string() const {
  return dims_string(dims_);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace sswp::diff
