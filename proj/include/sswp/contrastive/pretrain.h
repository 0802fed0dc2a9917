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

#ifndef SSWP_CONTRASTIVE_PRETRAIN_H_
#define SSWP_CONTRASTIVE_PRETRAIN_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sswp/common/flat_config.h"
#include "sswp/corpus/types.h"
#include "sswp/corpus/units.h"
#include "sswp/diffcore/parameter.h"
#include "sswp/encoders/config.h"

namespace sswp::con {

struct PretrainConfig {
  int epochs = 30;
  int batch_size = 128;
  double lr0 = 1e-4;
  double lr_min = 0.0;
  double grad_clip = 1.0;
  double tau_init = 0.07;
  std::uint64_t seed = 1;
  corpus::UnitMode unit_mode = corpus::UnitMode::kSswp;
  std::string checkpoint_out;
  enc::EncoderConfig model;

  void validate() const;
  // Reads the [pretrain] and [model] tables.
  static PretrainConfig from_flat(const FlatConfig& f);
  void write_toml(TomlWriter& w, bool include_model = true) const;
};

struct EpochLog {
  int epoch = 0;  // 0 is the evaluation before any update
  double mean_loss = 0.0;
  double retrieval_top1 = 0.0;
  double lr = 0.0;
  double tau = 0.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

struct PretrainResult {
  diff::ParamStore<float> params;  // both encoders, projections and theta
  std::vector<EpochLog> log;
};

// Initializes encoders from `init` when given (matching names), otherwise
// randomly. Throws NumericError on a non-finite loss.
PretrainResult pretrain(const corpus::Corpus& corpus, const PretrainConfig& cfg,
                        const EpochCallback& on_epoch = {},
                        const diff::ParamStore<float>* init = nullptr);

void write_epoch_csv(const std::string& path, const std::vector<EpochLog>& log);

// Masked-subword pretraining of the text encoder alone.
struct MlmConfig {
  int epochs = 10;
  int batch_size = 32;  // utterances
  double lr0 = 1e-3;
  double lr_min = 0.0;
  double mask_prob = 0.15;
  double grad_clip = 1.0;
  std::uint64_t seed = 1;
  enc::EncoderConfig model;

  void validate() const;
  // Reads the [mlm] and [model] tables.
  static MlmConfig from_flat(const FlatConfig& f);
  void write_toml(TomlWriter& w, bool include_model = true) const;
};

struct MlmResult {
  diff::ParamStore<float> params;  // text.* parameters only
  std::vector<double> epoch_loss;
};

MlmResult mlm_pretrain(const corpus::Corpus& corpus, const MlmConfig& cfg);

}  // namespace sswp::con

#endif  // SSWP_CONTRASTIVE_PRETRAIN_H_
