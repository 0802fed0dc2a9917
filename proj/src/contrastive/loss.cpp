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

#include "sswp/contrastive/loss.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sswp/common/error.h"

namespace sswp::con {

using diff::Expr;

template <typename T>
Expr<T> similarity_logits(Expr<T> s, Expr<T> t, Expr<T> theta) {
  if (s.rows() == 0) throw ShapeError("contrastive_loss: empty batch");
  if (s.rows() != t.rows() || s.cols() != t.cols()) {
    throw ShapeError("contrastive_loss: speech " + diff::dims_string(s.value().dims()) +
                     " and text " + diff::dims_string(t.value().dims()) + " differ");
  }
  if (theta.value().size() != 1) throw ShapeError("contrastive_loss: theta must be a scalar");
  auto sim = diff::pairwise_dot(diff::l2_normalize_rows(s), diff::l2_normalize_rows(t));
  return diff::mul(sim, diff::exp(diff::neg(theta)));
}

template <typename T>
Expr<T> contrastive_loss(Expr<T> s, Expr<T> t, Expr<T> theta) {
  return contrastive_loss_from_logits(similarity_logits(s, t, theta));
}

template <typename T>
Expr<T> contrastive_loss_from_logits(Expr<T> logits) {
  if (logits.rows() != logits.cols()) {
    throw ShapeError("contrastive_loss: logits " + diff::dims_string(logits.value().dims()) +
                     " are not square");
  }
  const int n = logits.rows();
  std::vector<int> diag(n);
  std::iota(diag.begin(), diag.end(), 0);
  // Column-wise log-softmax of S T^T is the row-wise one of T S^T.
  auto speech_to_text = diff::sum_all(diff::pick(diff::log_softmax(logits, 1), std::span<const int>(diag)));
  auto text_to_speech = diff::sum_all(diff::pick(diff::log_softmax(logits, 0), std::span<const int>(diag)));
  return diff::scale(diff::add(speech_to_text, text_to_speech), T(-1) / T(2 * n));
}

template <typename T>
double retrieval_top1(const diff::Tensor<T>& logits) {
  const int n = logits.rows();
  if (n == 0) return 0.0;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int j = 1; j < logits.cols(); ++j) {
      if (logits.at(i, j) > logits.at(i, best)) best = j;
    }
    hits += best == i;
  }
  return static_cast<double>(hits) / n;
}

template <typename T>
void add_temperature(diff::ParamStore<T>& ps, double tau) {
  if (!(tau >= kTauMin && tau <= kTauMax)) {
    throw ConfigError("temperature " + std::to_string(tau) + " outside [0.01, 1]");
  }
  ps.add_const(kThetaName, {1, 1}, static_cast<T>(std::log(tau)));
}

template <typename T>
void clamp_temperature(diff::ParamStore<T>& ps) {
  auto& theta = ps.get(kThetaName).value[0];
  theta = std::clamp(theta, static_cast<T>(std::log(kTauMin)), static_cast<T>(std::log(kTauMax)));
}

template <typename T>
double temperature(const diff::ParamStore<T>& ps) {
  return std::exp(static_cast<double>(ps.get(kThetaName).value[0]));
}

#define SSWP_INSTANTIATE_LOSS(T)                                                 \
  template Expr<T> similarity_logits(Expr<T>, Expr<T>, Expr<T>);                 \
  template Expr<T> contrastive_loss(Expr<T>, Expr<T>, Expr<T>);                  \
  template Expr<T> contrastive_loss_from_logits(Expr<T>);                        \
  template double retrieval_top1(const diff::Tensor<T>&);                        \
  template void add_temperature(diff::ParamStore<T>&, double);                   \
  template void clamp_temperature(diff::ParamStore<T>&);                         \
  template double temperature(const diff::ParamStore<T>&);

SSWP_INSTANTIATE_LOSS(float)
SSWP_INSTANTIATE_LOSS(double)

#undef SSWP_INSTANTIATE_LOSS

}  // namespace sswp::con
