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

#include "sswp/metrics/metrics.h"

#include <cstdio>
#include <json.hpp>

#include "sswp/common/error.h"

namespace sswp::metrics {

namespace {

double ratio(std::int64_t num, std::int64_t den, bool& undefined) {
  if (den == 0) {
    undefined = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricsReport evaluate(const std::vector<LabelSequence>& pred,
                       const std::vector<LabelSequence>& gold,
                       const std::vector<std::string>& ids) {
  if (pred.size() != gold.size()) {
    throw DataError("evaluate: " + std::to_string(pred.size()) + " predicted utterances vs " +
                    std::to_string(gold.size()) + " gold");
  }
  MetricsReport r;
  for (std::size_t u = 0; u < gold.size(); ++u) {
    if (pred[u].size() != gold[u].size()) {
      const std::string name = u < ids.size() ? ids[u] : "#" + std::to_string(u);
      throw DataError("evaluate: utterance " + name + " has " + std::to_string(pred[u].size()) +
                      " predicted labels for " + std::to_string(gold[u].size()) + " junctures");
    }
    for (std::size_t i = 0; i < gold[u].size(); ++i) {
      ++r.confusion[corpus::to_int(gold[u][i])][corpus::to_int(pred[u][i])];
      ++r.junctures;
    }
  }
  for (int c = 0; c < corpus::kNumLevels; ++c) {
    auto& s = r.classes[c];
    s.tp = r.confusion[c][c];
    for (int o = 0; o < corpus::kNumLevels; ++o) {
      if (o == c) continue;
      s.fp += r.confusion[o][c];
      s.fn += r.confusion[c][o];
    }
    s.precision = ratio(s.tp, s.tp + s.fp, s.undefined);
    s.recall = ratio(s.tp, s.tp + s.fn, s.undefined);
    const double pr = s.precision + s.recall;
    if (pr == 0.0) {
      s.undefined = s.undefined || s.tp + s.fp + s.fn == 0;
      s.f1 = 0.0;
    } else {
      s.f1 = 2.0 * s.precision * s.recall / pr;
    }
  }
  r.macro_f1 = (r.classes[1].f1 + r.classes[2].f1 + r.classes[3].f1) / 3.0;
  return r;
}

std::string MetricsReport::to_table() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-5s %8s %8s %8s %8s %8s %8s\n", "class", "prec", "rec", "f1",
                "tp", "fp", "fn");
  out += line;
  for (int c = 0; c < corpus::kNumLevels; ++c) {
    const auto& s = classes[c];
    std::snprintf(line, sizeof line, "%-5s %8.4f %8.4f %8.4f %8lld %8lld %8lld%s\n",
                  std::string(corpus::kLevelNames[c]).c_str(), s.precision, s.recall, s.f1,
                  static_cast<long long>(s.tp), static_cast<long long>(s.fp),
                  static_cast<long long>(s.fn), s.undefined ? "  (undefined)" : "");
    out += line;
  }
  std::snprintf(line, sizeof line, "macro-F1 (PW, PPH, IPH): %.4f over %lld junctures\n", macro_f1,
                static_cast<long long>(junctures));
  out += line;
  out += "confusion (rows gold, columns predicted)\n";
  std::snprintf(line, sizeof line, "%-5s %8s %8s %8s %8s\n", "", "LW", "PW", "PPH", "IPH");
  out += line;
  for (int g = 0; g < corpus::kNumLevels; ++g) {
    std::snprintf(line, sizeof line, "%-5s %8lld %8lld %8lld %8lld\n",
                  std::string(corpus::kLevelNames[g]).c_str(),
                  static_cast<long long>(confusion[g][0]), static_cast<long long>(confusion[g][1]),
                  static_cast<long long>(confusion[g][2]), static_cast<long long>(confusion[g][3]));
    out += line;
  }
  return out;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["junctures"] = junctures;
  j["macro_f1"] = macro_f1;
  auto& cls = j["classes"];
  for (int c = 0; c < corpus::kNumLevels; ++c) {
    const auto& s = classes[c];
    cls[std::string(corpus::kLevelNames[c])] = {{"precision", s.precision}, {"recall", s.recall},
                                                {"f1", s.f1},               {"tp", s.tp},
                                                {"fp", s.fp},               {"fn", s.fn},
                                                {"undefined", s.undefined}};
  }
  j["confusion"] = confusion;
  return j.dump(2);
}

}  // namespace sswp::metrics
