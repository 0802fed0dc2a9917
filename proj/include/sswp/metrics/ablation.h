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

#ifndef SSWP_METRICS_ABLATION_H_
#define SSWP_METRICS_ABLATION_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sswp/annotator/annotator.h"
#include "sswp/common/flat_config.h"
#include "sswp/contrastive/pretrain.h"
#include "sswp/corpus/split.h"
#include "sswp/metrics/metrics.h"

namespace sswp::metrics {

enum class Arm { kFull, kNoContrastivePretrain, kNoAnyPretrain, kNoSswp, kNoBilstm };

// "full", "no_contrastive_pretrain", "no_any_pretrain", "no_sswp",
// "no_bilstm"; anything else throws ConfigError.
Arm parse_arm(const std::string& name);
std::string arm_name(Arm arm);
const std::vector<std::string>& all_arm_names();

// Shared model dims come from `train.model`; the pretraining stages use the
// same encoder configuration.
struct AblationConfig {
  std::vector<std::string> arms = all_arm_names();
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  con::PretrainConfig pretrain;
  con::MlmConfig mlm;
  ann::AnnotatorConfig train;

  void validate() const;
  // Reads [ablation] (arms, seeds) plus the [pretrain], [mlm], [train] and
  // [model] tables.
  static AblationConfig from_flat(const FlatConfig& f);
  void write_toml(TomlWriter& w) const;
};

struct ArmResult {
  std::string arm;
  std::vector<MetricsReport> per_seed;  // test-split reports, seed order
  // Precision, recall and F1 averaged over seeds.
  std::array<ClassStats, corpus::kNumLevels> mean{};
  double mean_macro_f1 = 0.0;
};

struct AblationTable {
  std::vector<ArmResult> arms;

  const ArmResult& at(const std::string& arm) const;
  std::string to_table() const;
  std::string to_json() const;
};

using AblationProgress =
    std::function<void(const std::string& arm, std::uint64_t seed, const MetricsReport& test)>;

// Each arm trains on `split.train`, selects on `split.valid`, and is scored
// on `split.test`. Stage-1 arms pretrain on `pretrain_corpus` (labels unused).
AblationTable run_ablation(const corpus::Corpus& pretrain_corpus, const corpus::CorpusSplit& split,
                           const AblationConfig& cfg, const AblationProgress& progress = {});

}  // namespace sswp::metrics

#endif  // SSWP_METRICS_ABLATION_H_
