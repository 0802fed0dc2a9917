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

#ifndef SSWP_DIFFCORE_GRADCHECK_H_
#define SSWP_DIFFCORE_GRADCHECK_H_

#include <cstddef>
#include <functional>
#include <random>
#include <string>

#include "sswp/diffcore/graph.h"

namespace sswp::diff {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor of the relative error, so that gradients that are
  // numerically zero are compared in absolute terms.
  double floor = 1e-5;
  // Per-tensor cap on checked coordinates; 0 checks every coordinate.
  std::size_t max_coords_per_tensor = 0;
  std::uint64_t seed = 1;
};

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t coords_checked = 0;
  bool passed = false;
};

using LossBuilder = std::function<Expr<double>(Graph<double>&)>;

// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor);

// Compares reverse-mode gradients of `loss` with respect to every trainable
// parameter in `params` against central differences (f(p+h) - f(p-h)) / 2h.
GradCheckResult check_gradients(const std::string& name, ParamStore<double>& params,
                                const LossBuilder& loss,
                                const GradCheckOptions& opts = {});

}  // namespace sswp::diff

#endif  // SSWP_DIFFCORE_GRADCHECK_H_
