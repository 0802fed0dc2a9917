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

#include "sswp/corpus/units.h"

#include "sswp/common/error.h"

namespace sswp::corpus {

std::vector<SSWPUnit> build_sswp_units(const UtteranceRecord& utt, UnitMode mode) {
  validate(utt, /*require_labels=*/false);
  std::vector<SSWPUnit> units;
  units.reserve(utt.words.size());
  int sub = 0;
  for (std::size_t i = 0; i < utt.words.size(); ++i) {
    const WordToken& w = utt.words[i];
    SSWPUnit u;
    u.word_index = static_cast<int>(i);
    u.subword_begin = sub;
    sub += static_cast<int>(w.subword_ids.size());
    const int word_end = sub;
    if (w.has_punct()) ++sub;
    const bool last = i + 1 == utt.words.size();
    const int silence_end = last ? utt.num_frames() : utt.words[i + 1].frame_start;
    u.silence_frames = silence_end - w.frame_end;
    u.frame_begin = w.frame_start;
    if (mode == UnitMode::kSswp) {
      u.text_span = w.text + w.punct;
      u.subword_end = sub;
      u.frame_end = silence_end;
    } else {
      u.text_span = w.text;
      u.subword_end = word_end;
      u.frame_end = w.frame_end;
    }
    if (!utt.labels.empty()) u.label = utt.labels[i];
    units.push_back(std::move(u));
  }
  return units;
}

UnitMode parse_unit_mode(const std::string& name) {
  if (name == "sswp") return UnitMode::kSswp;
  if (name == "word") return UnitMode::kWordOnly;
  throw ConfigError("unknown unit mode '" + name + "' (expected sswp or word)");
}

std::string unit_mode_name(UnitMode mode) { return mode == UnitMode::kSswp ? "sswp" : "word"; }

UnitTable::UnitTable(const Corpus& corpus, UnitMode mode) : corpus_(&corpus), mode_(mode) {
  units_.reserve(corpus.size());
  subwords_.reserve(corpus.size());
  for (std::size_t u = 0; u < corpus.size(); ++u) {
    units_.push_back(build_sswp_units(corpus[u], mode));
    subwords_.push_back(utterance_subwords(corpus[u]));
    for (std::size_t k = 0; k < units_.back().size(); ++k) {
      all_.push_back({static_cast<int>(u), static_cast<int>(k)});
    }
  }
}

}  // namespace sswp::corpus
