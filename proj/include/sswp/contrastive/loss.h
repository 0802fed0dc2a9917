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

#ifndef SSWP_CONTRASTIVE_LOSS_H_
#define SSWP_CONTRASTIVE_LOSS_H_

#include "sswp/diffcore/ops.h"
#include "sswp/diffcore/parameter.h"

namespace sswp::con {

// Temperature tau = exp(theta).
inline constexpr double kTauInit = 0.07;
inline constexpr double kTauMin = 0.01;
inline constexpr double kTauMax = 1.0;
inline constexpr const char* kThetaName = "contrastive.theta";

// n x n matrix of cosine similarities divided by tau; theta is 1 x 1.
template <typename T>
diff::Expr<T> similarity_logits(diff::Expr<T> s, diff::Expr<T> t, diff::Expr<T> theta);

// Loss from precomputed similarity logits.
template <typename T>
diff::Expr<T> contrastive_loss_from_logits(diff::Expr<T> logits);

// Symmetric in-batch loss:
//   -(1/2n) sum_i [log softmax_row(S T^T / tau)_ii + log softmax_row(T S^T / tau)_ii]
template <typename T>
diff::Expr<T> contrastive_loss(diff::Expr<T> s, diff::Expr<T> t, diff::Expr<T> theta);

// Fraction of rows i with argmax_j logits(i, j) == i. Ties count as misses
// unless the diagonal comes first.
template <typename T>
double retrieval_top1(const diff::Tensor<T>& logits);

template <typename T>
void add_temperature(diff::ParamStore<T>& ps, double tau = kTauInit);

template <typename T>
void clamp_temperature(diff::ParamStore<T>& ps);

template <typename T>
double temperature(const diff::ParamStore<T>& ps);

}  // namespace sswp::con

#endif  // SSWP_CONTRASTIVE_LOSS_H_
