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

#include "sswp/diffcore/optim.h"

#include <cmath>
#include <numbers>
#include <string>

#include "sswp/common/error.h"

namespace sswp::diff {

template <typename T>
void adam_step(ParamStore<T>& params, AdamState<T>& state, double lr,
               const AdamConfig& cfg) {
  if (!(lr > 0.0)) throw ConfigError("adam: learning rate must be positive");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p->value.dims());
      state.v.emplace_back(p->value.dims());
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("adam: state tracks " + std::to_string(state.m.size()) +
                     " parameters, store has " + std::to_string(params.size()));
  }
  std::size_t i = 0;
  for (const auto& p : params) {
    if (state.m[i].dims() != p->value.dims()) {
      throw ShapeError("adam: accumulator shape mismatch for " + p->name);
    }
    for (std::size_t k = 0; k < p->grad.size(); ++k) {
      if (!std::isfinite(static_cast<double>(p->grad[k]))) {
        throw NumericError("adam: non-finite gradient in parameter '" + p->name +
                           "' at element " + std::to_string(k));
      }
    }
    ++i;
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  i = 0;
  for (auto& p : params) {
    auto& m = state.m[i];
    auto& v = state.v[i];
    ++i;
    if (!p->trainable) continue;
    for (std::size_t k = 0; k < p->value.size(); ++k) {
      const T g = p->grad[k];
      m[k] = b1 * m[k] + (T(1) - b1) * g;
      v[k] = b2 * v[k] + (T(1) - b2) * g * g;
      const double mhat = static_cast<double>(m[k]) / bc1;
      const double vhat = static_cast<double>(v[k]) / bc2;
      p->value[k] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
  }
}

template <typename T>
double clip_grad_norm(ParamStore<T>& params, double max_norm) {
  double ss = 0.0;
  for (const auto& p : params) {
    for (T g : p->grad.data()) ss += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(ss);
  if (max_norm > 0.0 && norm > max_norm) {
    const T f = static_cast<T>(max_norm / norm);
    for (auto& p : params) {
      for (auto& g : p->grad.data()) g *= f;
    }
  }
  return norm;
}

double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr0,
                 double lr_min) {
  if (step >= total_steps) return lr_min;
  if (step <= 0) return lr0;
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + std::cos(std::numbers::pi * frac));
}

template void adam_step(ParamStore<float>&, AdamState<float>&, double, const AdamConfig&);
template void adam_step(ParamStore<double>&, AdamState<double>&, double, const AdamConfig&);
template double clip_grad_norm(ParamStore<float>&, double);
template double clip_grad_norm(ParamStore<double>&, double);

}  // namespace sswp::diff
