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

#ifndef SSWP_CORPUS_UNITS_H_
#define SSWP_CORPUS_UNITS_H_

#include <compare>
#include <string>
#include <vector>

#include "sswp/corpus/types.h"

namespace sswp::corpus {

// kSswp pairs word+punctuation with speech+trailing silence. kWordOnly strips
// the punctuation subword from the text range and the silence from the
// speech span.
enum class UnitMode { kSswp, kWordOnly };

// "sswp" or "word"; anything else throws ConfigError.
UnitMode parse_unit_mode(const std::string& name);
std::string unit_mode_name(UnitMode mode);

struct SSWPUnit {
  int word_index = 0;
  std::string text_span;  // word text plus trailing punctuation
  int subword_begin = 0;  // half-open range into utterance_subwords()
  int subword_end = 0;
  int frame_begin = 0;  // half-open speech span
  int frame_end = 0;
  int silence_frames = 0;
  BoundaryLevel label = BoundaryLevel::LW;

  int num_frames() const { return frame_end - frame_begin; }
  int num_subwords() const { return subword_end - subword_begin; }
};

// One unit per word. Silence between words belongs to the preceding unit;
// the last unit runs to the end of the utterance. Silence before the first
// word is not covered by any unit. Labels are copied when present.
std::vector<SSWPUnit> build_sswp_units(const UtteranceRecord& utt,
                                       UnitMode mode = UnitMode::kSswp);

// Identifies one unit: utterance index into the corpus, unit index within it.
struct UnitRef {
  int utterance = 0;
  int unit = 0;
  auto operator<=>(const UnitRef&) const = default;
};

// Units and subword sequences for every utterance of a corpus. Holds a
// reference to the corpus, which must outlive the table.
class UnitTable {
 public:
  UnitTable(const Corpus& corpus, UnitMode mode);

  const Corpus& corpus() const { return *corpus_; }
  UnitMode mode() const { return mode_; }
  const std::vector<SSWPUnit>& units(int utterance) const { return units_[utterance]; }
  const std::vector<int>& subwords(int utterance) const { return subwords_[utterance]; }
  const SSWPUnit& unit(UnitRef r) const { return units_[r.utterance][r.unit]; }
  // Every unit in corpus order.
  const std::vector<UnitRef>& all() const { return all_; }
  int num_utterances() const { return static_cast<int>(units_.size()); }

 private:
  const Corpus* corpus_;
  UnitMode mode_;
  std::vector<std::vector<SSWPUnit>> units_;
  std::vector<std::vector<int>> subwords_;
  std::vector<UnitRef> all_;
};

}  // namespace sswp::corpus

#endif  // SSWP_CORPUS_UNITS_H_
