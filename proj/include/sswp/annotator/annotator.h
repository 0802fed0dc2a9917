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

#ifndef SSWP_ANNOTATOR_ANNOTATOR_H_
#define SSWP_ANNOTATOR_ANNOTATOR_H_

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sswp/common/flat_config.h"
#include "sswp/corpus/types.h"
#include "sswp/corpus/units.h"
#include "sswp/diffcore/binder.h"
#include "sswp/diffcore/ops.h"
#include "sswp/encoders/config.h"
#include "sswp/metrics/metrics.h"

namespace sswp::ann {

struct AnnotatorConfig {
  int epochs = 20;
  int batch_size = 16;  // utterances
  double lr0 = 1e-5;
  double lr_min = 0.0;
  // Encoder learning rate relative to lr0; the classifier head uses lr0.
  double encoder_lr_scale = 1.0;
  double grad_clip = 1.0;
  int hidden = 128;  // per direction
  bool use_bilstm = true;
  bool text_only = false;  // audio embeddings are zeroed
  bool freeze_encoders = false;
  std::vector<double> class_weights;  // empty: uniform
  corpus::UnitMode unit_mode = corpus::UnitMode::kSswp;
  std::uint64_t seed = 1;
  std::string pretrained;  // encoder checkpoint path, resolved by the caller
  std::string checkpoint_out;
  enc::EncoderConfig model;

  void validate() const;
  // Reads the [train] and [model] tables.
  static AnnotatorConfig from_flat(const FlatConfig& f);
  void write_toml(TomlWriter& w, bool include_model = true) const;
};

struct Annotator {
  AnnotatorConfig config;
  diff::ParamStore<float> params;
};

// Bi-LSTM ("lstm.fwd.*", "lstm.bwd.*") and output layer ("out.*").
template <typename T>
void init_classifier(diff::ParamStore<T>& ps, int input_dim, int hidden, bool use_bilstm,
                     std::mt19937_64& rng);

template <typename T>
diff::Expr<T> fuse(diff::Expr<T> t, diff::Expr<T> s);

// Rows of `e` are the units of consecutive sequences with the given
// lengths. Returns one row of 4 logits per unit, in the same order.
template <typename T>
diff::Expr<T> sequence_logits(diff::Binder<T>& bind, diff::Expr<T> e, std::span<const int> lengths,
                              int hidden, bool use_bilstm);

// Softmax of sequence_logits for a single sequence (m x 4).
template <typename T>
diff::Tensor<T> classify_sequence(const diff::ParamStore<T>& ps, const diff::Tensor<T>& e,
                                  int hidden, bool use_bilstm);

// Mean over rows of -w[label] * log softmax(logits)[label].
template <typename T>
diff::Expr<T> ce_loss(diff::Expr<T> logits, std::span<const int> labels,
                      std::span<const double> class_weights = {});

// Argmax per row; ties go to the lower boundary level.
template <typename T>
std::vector<corpus::BoundaryLevel> argmax_levels(const diff::Tensor<T>& logits);

// Logits for every unit of the listed utterances, encoders included.
diff::Expr<float> annotator_logits(diff::Binder<float>& bind, const AnnotatorConfig& cfg,
                                   const corpus::UnitTable& table,
                                   std::span<const int> utterances);

struct TrainEpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double valid_macro_f1 = 0.0;
  double valid_pw_f1 = 0.0;
  double valid_pph_f1 = 0.0;
  double valid_iph_f1 = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  Annotator model;  // parameters of the best validation epoch
  std::vector<TrainEpochLog> log;
  int best_epoch = 0;
};

using TrainCallback = std::function<void(const TrainEpochLog&)>;

// `pretrained` initializes every tensor it shares with the model; shape
// mismatches throw CheckpointError listing the tensors.
TrainResult train_annotator(const corpus::Corpus& train, const corpus::Corpus& valid,
                            const AnnotatorConfig& cfg,
                            const diff::ParamStore<float>* pretrained = nullptr,
                            const TrainCallback& on_epoch = {});

// Reentrant: reads the model only.
std::vector<metrics::LabelSequence> annotate(const Annotator& model, const corpus::Corpus& corpus,
                                             int batch_size = 32);

void write_train_csv(const std::string& path, const std::vector<TrainEpochLog>& log);

void save_annotator(const std::string& path, const Annotator& model);
Annotator load_annotator(const std::string& path);

// {"id": ..., "labels": [...]} per line.
void write_annotations_jsonl(const std::string& path, const corpus::Corpus& corpus,
                             const std::vector<metrics::LabelSequence>& labels);
std::vector<metrics::LabelSequence> read_annotations_jsonl(const std::string& path,
                                                           std::vector<std::string>* ids = nullptr);

}  // namespace sswp::ann

#endif  // SSWP_ANNOTATOR_ANNOTATOR_H_
