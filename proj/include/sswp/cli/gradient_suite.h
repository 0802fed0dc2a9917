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

#ifndef SSWP_CLI_GRADIENT_SUITE_H_
#define SSWP_CLI_GRADIENT_SUITE_H_

#include <functional>
#include <string>
#include <vector>

#include "sswp/diffcore/gradcheck.h"

namespace sswp::cli {

struct SuiteOptions {
  int trials_per_op = 3;
  double step = 1e-5;
  double tolerance = 1e-4;
  std::uint64_t seed = 1;
};

// Finite-difference checks in f64 for every diffcore op, both encoders end to
// end, the contrastive loss (with temperature), the CE loss and the full
// annotator on a two-unit sequence. One result per check; an op's result is
// the worst of its trials.
std::vector<diff::GradCheckResult> run_gradient_suite(
    const SuiteOptions& opts = {},
    const std::function<void(const diff::GradCheckResult&)>& on_result = {});

}  // namespace sswp::cli

#endif  // SSWP_CLI_GRADIENT_SUITE_H_
