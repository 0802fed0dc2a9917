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

#ifndef SSWP_DIFFCORE_OPS_H_
#define SSWP_DIFFCORE_OPS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "sswp/diffcore/graph.h"

namespace sswp::diff {

// All ops view operands as matrices (see Tensor). Shape violations raise
// ShapeError with the op name and the offending dimensions.

template <typename T> Expr<T> matmul(Expr<T> a, Expr<T> b);
// a * b^T
template <typename T> Expr<T> matmul_nt(Expr<T> a, Expr<T> b);
// a * b^T evaluated with a fixed-order scalar loop; entry (i, j) is
// bit-identical to entry (j, i) of pairwise_dot(b, a).
template <typename T> Expr<T> pairwise_dot(Expr<T> a, Expr<T> b);
template <typename T> Expr<T> transpose(Expr<T> a);

// Elementwise with broadcasting: each dimension must match or be 1.
template <typename T> Expr<T> add(Expr<T> a, Expr<T> b);
template <typename T> Expr<T> sub(Expr<T> a, Expr<T> b);
template <typename T> Expr<T> mul(Expr<T> a, Expr<T> b);
template <typename T> Expr<T> scale(Expr<T> a, T s);
template <typename T> Expr<T> neg(Expr<T> a) { return scale(a, T(-1)); }

template <typename T> Expr<T> exp(Expr<T> a);
template <typename T> Expr<T> log(Expr<T> a);
template <typename T> Expr<T> tanh(Expr<T> a);
template <typename T> Expr<T> sigmoid(Expr<T> a);
// x * sigmoid(x)
template <typename T> Expr<T> swish(Expr<T> a);
// tanh approximation
template <typename T> Expr<T> gelu(Expr<T> a);

// axis 1: normalize each row; axis 0: each column. Max-subtracted.
template <typename T> Expr<T> softmax(Expr<T> a, int axis = 1);
template <typename T> Expr<T> log_softmax(Expr<T> a, int axis = 1);

// Row-wise normalization with 1 x cols gain and bias.
template <typename T>
Expr<T> layer_norm(Expr<T> x, Expr<T> gamma, Expr<T> beta, T eps = T(1e-5));

// Rows of `table` selected by `ids`; id -1 yields a zero row.
template <typename T> Expr<T> embedding(Expr<T> table, std::span<const int> ids);
template <typename T> Expr<T> gather_rows(Expr<T> a, std::span<const int> ids) {
  return embedding(a, ids);
}

template <typename T> Expr<T> concat(const std::vector<Expr<T>>& xs, int axis);
// Half-open ranges.
template <typename T> Expr<T> slice_rows(Expr<T> a, int begin, int end);
template <typename T> Expr<T> slice_cols(Expr<T> a, int begin, int end);
template <typename T> Expr<T> reshape(Expr<T> a, std::vector<int> dims);

// Entries where mask != 0 are replaced by `value`; mask has a.size() entries.
template <typename T>
Expr<T> masked_fill(Expr<T> a, std::span<const std::uint8_t> mask, T value);

template <typename T> Expr<T> sum(Expr<T> a, int axis);
template <typename T> Expr<T> mean(Expr<T> a, int axis);
template <typename T> Expr<T> sum_all(Expr<T> a);
template <typename T> Expr<T> mean_all(Expr<T> a);

// Rows of `x` form consecutive segments of `segment_len` frames. Each channel
// is convolved with its own odd-length kernel (weights: k x channels), "same"
// zero padding at segment edges; no mixing across segments.
template <typename T>
Expr<T> depthwise_conv1d(Expr<T> x, Expr<T> weights, int segment_len);

template <typename T> Expr<T> l2_normalize_rows(Expr<T> a, T eps = T(1e-12));

// out[i] = a[i, index[i]], shape rows x 1.
template <typename T> Expr<T> pick(Expr<T> a, std::span<const int> index);

// Multi-head scaled dot-product attention over independent segments.
// q, k, v: (segments * segment_len) x d. Keys at positions >= valid_len[s]
// of segment s are masked out.
template <typename T>
Expr<T> segment_attention(Expr<T> q, Expr<T> k, Expr<T> v, int segment_len,
                          int heads, std::span<const int> valid_len);

// out[s] = sum_t alpha[s, t] * h[s * L + t] with alpha: segments x L.
template <typename T>
Expr<T> segment_weighted_sum(Expr<T> alpha, Expr<T> h);

template <typename T> Expr<T> operator+(Expr<T> a, Expr<T> b) { return add(a, b); }
template <typename T> Expr<T> operator-(Expr<T> a, Expr<T> b) { return sub(a, b); }
template <typename T> Expr<T> operator*(Expr<T> a, Expr<T> b) { return mul(a, b); }

}  // namespace sswp::diff

#endif  // SSWP_DIFFCORE_OPS_H_
