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

#ifndef SSWP_DIFFCORE_TENSOR_H_
#define SSWP_DIFFCORE_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace sswp::diff {

// Fixed 64-byte alignment keeps vectorized kernels on the same code path for
// every allocation, so results do not depend on heap addresses.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

// Dense row-major tensor. Ops treat every tensor as a matrix: the last
// dimension is `cols()`, everything before it folds into `rows()`. A rank-1
// tensor is a single row.
template <typename T>
class Tensor {
 public:
  using value_type = T;
  using Storage = std::vector<T, AlignedAllocator<T>>;

  Tensor() = default;
  explicit Tensor(std::vector<int> dims, T fill = T(0));
  Tensor(std::vector<int> dims, const std::vector<T>& data);
  Tensor(std::vector<int> dims, Storage data);

  static Tensor matrix(int rows, int cols, T fill = T(0)) {
    return Tensor({rows, cols}, fill);
  }
  static Tensor scalar(T v) { return Tensor({1, 1}, std::vector<T>{v}); }

  const std::vector<int>& dims() const { return dims_; }
  int rank() const { return static_cast<int>(dims_.size()); }
  int rows() const;
  int cols() const { return dims_.empty() ? 0 : dims_.back(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  Storage& storage() { return data_; }
  const Storage& storage() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  const T& at(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols() + c];
  }
  T item() const;

  std::span<T> row(int r) {
    return std::span<T>(data_).subspan(static_cast<std::size_t>(r) * cols(),
                                       cols());
  }
  std::span<const T> row(int r) const {
    return std::span<const T>(data_).subspan(
        static_cast<std::size_t>(r) * cols(), cols());
  }

  void fill(T v);
  bool same_shape(const Tensor& o) const { return rows() == o.rows() && cols() == o.cols(); }
  std::string shape_string() const;

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(dims_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool requires_grad = false;

 private:
  std::vector<int> dims_;
  Storage data_;
};

std::string dims_string(const std::vector<int>& dims);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace sswp::diff

#endif  // SSWP_DIFFCORE_TENSOR_H_
