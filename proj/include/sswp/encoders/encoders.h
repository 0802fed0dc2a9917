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

#ifndef SSWP_ENCODERS_ENCODERS_H_
#define SSWP_ENCODERS_ENCODERS_H_

#include <random>
#include <span>
#include <string>
#include <vector>

#include "sswp/diffcore/binder.h"
#include "sswp/diffcore/ops.h"
#include "sswp/encoders/config.h"

namespace sswp::enc {

// Subword range [begin, end) of one utterance in a TextBatch.
struct SubwordRange {
  int sequence = 0;
  int begin = 0;
  int end = 0;
};

// Utterances to contextualize, plus the unit ranges to read out. Each
// utterance is encoded once; every range selects rows of its encoding.
struct TextBatch {
  std::vector<std::vector<int>> sequences;
  std::vector<SubwordRange> ranges;
};

// Frame span [begin, end) of a feature matrix (num_frames x feat_dim).
struct FrameSpan {
  const diff::Tensor<float>* frames = nullptr;
  int begin = 0;
  int end = 0;
};

template <typename T>
void init_text_encoder(diff::ParamStore<T>& ps, const TextEncoderConfig& cfg, int joint_dim,
                       std::mt19937_64& rng);
template <typename T>
void init_audio_encoder(diff::ParamStore<T>& ps, const AudioEncoderConfig& cfg, int joint_dim,
                        std::mt19937_64& rng);
template <typename T>
void init_encoders(diff::ParamStore<T>& ps, const EncoderConfig& cfg, std::mt19937_64& rng) {
  init_text_encoder(ps, cfg.text, cfg.joint_dim, rng);
  init_audio_encoder(ps, cfg.audio, cfg.joint_dim, rng);
}

// Attention pooling over segments of `h` ((segments * L) x d):
// alpha = softmax_t(v . tanh(W h_t + b)) over the first lengths[s] rows of
// each segment; out[s] = sum_t alpha_t h_t. Parameters <prefix>.w/.b/.v.
template <typename T>
diff::Expr<T> attentive_pool(diff::Binder<T>& bind, const std::string& prefix, diff::Expr<T> h,
                             std::span<const int> lengths);

// Pooling weights alpha (segments x L) as computed inside attentive_pool.
template <typename T>
diff::Expr<T> attentive_pool_weights(diff::Binder<T>& bind, const std::string& prefix,
                                     diff::Expr<T> h, std::span<const int> lengths);

// Contextualized subword rows of every sequence, padded to the longest
// ((sequences * L) x dim). Exposed for masked-subword pretraining.
template <typename T>
diff::Expr<T> text_hidden(diff::Binder<T>& bind, const TextEncoderConfig& cfg,
                          const std::vector<std::vector<int>>& sequences, int* padded_len);

// Rows: Linear(Pool(H[begin..end))) per requested range, num_ranges x joint.
template <typename T>
diff::Expr<T> encode_text(diff::Binder<T>& bind, const TextEncoderConfig& cfg,
                          const TextBatch& batch);

// Rows: Linear(Pool(Conformer(span))) per span, each span encoded on its
// own (padding between spans is masked), num_spans x joint.
template <typename T>
diff::Expr<T> encode_audio(diff::Binder<T>& bind, const AudioEncoderConfig& cfg,
                           std::span<const FrameSpan> spans);

}  // namespace sswp::enc

#endif  // SSWP_ENCODERS_ENCODERS_H_
