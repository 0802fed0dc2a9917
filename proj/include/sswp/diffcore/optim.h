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

#ifndef SSWP_DIFFCORE_OPTIM_H_
#define SSWP_DIFFCORE_OPTIM_H_

#include <cstdint>
#include <vector>

#include "sswp/diffcore/parameter.h"

namespace sswp::diff {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment accumulators, one pair per parameter in store order.
template <typename T>
struct AdamState {
  std::int64_t step = 0;
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
};

// One bias-corrected Adam update of every trainable parameter using its
// accumulated grad. Throws NumericError naming the first parameter whose
// gradient holds a NaN or Inf; nothing is modified in that case.
template <typename T>
void adam_step(ParamStore<T>& params, AdamState<T>& state, double lr,
               const AdamConfig& cfg = {});

// Scales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
template <typename T>
double clip_grad_norm(ParamStore<T>& params, double max_norm);

// lr_min + 0.5 (lr0 - lr_min) (1 + cos(pi step / total)); steps past the end
// clamp to lr_min.
double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr0,
                 double lr_min);

extern template void adam_step(ParamStore<float>&, AdamState<float>&, double,
                               const AdamConfig&);
extern template void adam_step(ParamStore<double>&, AdamState<double>&, double,
                               const AdamConfig&);

}  // namespace sswp::diff

#endif  // SSWP_DIFFCORE_OPTIM_H_
