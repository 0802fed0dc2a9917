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

#include "sswp/diffcore/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sswp::diff {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double evaluate(const LossBuilder& loss) {
  Graph<double> g(false);
  return loss(g).value().item();
}

}  // namespace

GradCheckResult check_gradients(const std::string& name, ParamStore<double>& params,
                                const LossBuilder& loss, const GradCheckOptions& opts) {
  GradCheckResult res;
  res.name = name;
  params.zero_grad();
  {
    Graph<double> g;
    Expr<double> l = loss(g);
    g.backward(l);
  }
  std::mt19937_64 rng(opts.seed);
  for (auto& p : params) {
    if (!p->trainable) continue;
    std::vector<std::size_t> coords(p->value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (opts.max_coords_per_tensor > 0 && coords.size() > opts.max_coords_per_tensor) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(opts.max_coords_per_tensor);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t k : coords) {
      const double orig = p->value[k];
      p->value[k] = orig + opts.step;
      const double fp = evaluate(loss);
      p->value[k] = orig - opts.step;
      const double fm = evaluate(loss);
      p->value[k] = orig;
      const double numeric = (fp - fm) / (2.0 * opts.step);
      const double err = relative_error(p->grad[k], numeric, opts.floor);
      if (err > res.max_rel_error || !std::isfinite(err)) {
        res.max_rel_error = std::isfinite(err) ? err : INFINITY;
        res.worst_param = p->name + "[" + std::to_string(k) + "]";
      }
      ++res.coords_checked;
    }
  }
  res.passed = res.max_rel_error <= opts.tolerance;
  return res;
}

}  // namespace sswp::diff
