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

#ifndef SSWP_CORPUS_TYPES_H_
#define SSWP_CORPUS_TYPES_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sswp/diffcore/tensor.h"

namespace sswp::corpus {

// Juncture strength after a word. The stored label is the deepest
// constituent closing at that juncture.
enum class BoundaryLevel : std::uint8_t { LW = 0, PW = 1, PPH = 2, IPH = 3 };

inline constexpr int kNumLevels = 4;
inline constexpr std::array<std::string_view, kNumLevels> kLevelNames = {"LW", "PW", "PPH",
                                                                         "IPH"};

inline std::string_view level_name(BoundaryLevel l) {
  return kLevelNames[static_cast<int>(l)];
}
inline int to_int(BoundaryLevel l) { return static_cast<int>(l); }
// Throws DataError for values outside 0..3.
BoundaryLevel level_from_int(int v);

// Reserved subword ids. Word subwords start at kFirstWordSubword.
inline constexpr int kPadSubword = 0;
inline constexpr int kMaskSubword = 1;
inline constexpr int kFirstWordSubword = 8;
// Id of a punctuation mark; unknown marks share one id.
int punct_subword_id(std::string_view punct);

struct WordToken {
  std::string text;
  std::string punct;  // empty when the word has no trailing punctuation
  std::vector<int> subword_ids;
  int frame_start = 0;
  int frame_end = 0;  // exclusive

  bool has_punct() const { return !punct.empty(); }
};

struct UtteranceRecord {
  std::string id;
  std::vector<WordToken> words;
  diff::Tensor<float> frames;  // num_frames x feat_dim
  std::vector<BoundaryLevel> labels;  // empty for unlabeled input

  int num_frames() const { return frames.empty() ? 0 : frames.rows(); }
  int feat_dim() const { return frames.empty() ? 0 : frames.cols(); }
};

using Corpus = std::vector<UtteranceRecord>;

// Checks the record invariants; throws DataError naming the utterance.
void validate(const UtteranceRecord& utt, bool require_labels = true);

// Flattened subword sequence of the utterance: each word's subwords followed
// by its punctuation id, if any.
std::vector<int> utterance_subwords(const UtteranceRecord& utt);

std::size_t count_words(const Corpus& corpus);

}  // namespace sswp::corpus

#endif  // SSWP_CORPUS_TYPES_H_
