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

#ifndef SSWP_METRICS_METRICS_H_
#define SSWP_METRICS_METRICS_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sswp/corpus/types.h"

namespace sswp::metrics {

using LabelSequence = std::vector<corpus::BoundaryLevel>;

struct ClassStats {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when any of the three ratios was 0/0 and reported as 0.
  bool undefined = false;
};

struct MetricsReport {
  std::array<ClassStats, corpus::kNumLevels> classes{};
  // confusion[gold][pred]
  std::array<std::array<std::int64_t, corpus::kNumLevels>, corpus::kNumLevels> confusion{};
  std::int64_t junctures = 0;
  double macro_f1 = 0.0;  // over PW, PPH, IPH

  const ClassStats& at(corpus::BoundaryLevel l) const { return classes[corpus::to_int(l)]; }
  std::string to_table() const;
  std::string to_json() const;
};

// One-vs-rest counts over every juncture of every utterance. `ids` (optional)
// names utterances in length-mismatch errors.
MetricsReport evaluate(const std::vector<LabelSequence>& pred,
                       const std::vector<LabelSequence>& gold,
                       const std::vector<std::string>& ids = {});

}  // namespace sswp::metrics

#endif  // SSWP_METRICS_METRICS_H_
