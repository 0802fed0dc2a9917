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

#include "sswp/corpus/types.h"

#include "sswp/common/error.h"

namespace sswp::corpus {

BoundaryLevel level_from_int(int v) {
  if (v < 0 || v >= kNumLevels) {
    throw DataError("boundary label " + std::to_string(v) + " outside 0..3");
  }
  return static_cast<BoundaryLevel>(v);
}

int punct_subword_id(std::string_view punct) {
  if (punct == ",") return 2;
  if (punct == ".") return 3;
  if (punct == "?") return 4;
  if (punct == "!") return 5;
  if (punct == ";" || punct == ":") return 6;
  return 7;
}

void validate(const UtteranceRecord& utt, bool require_labels) {
  auto fail = [&](const std::string& msg) {
    throw DataError("utterance '" + utt.id + "': " + msg);
  };
  if (utt.words.empty()) fail("no words");
  const int nf = utt.num_frames();
  int prev_end = 0;
  for (std::size_t i = 0; i < utt.words.size(); ++i) {
    const WordToken& w = utt.words[i];
    const std::string where = "word " + std::to_string(i) + " ('" + w.text + "')";
    if (w.subword_ids.empty()) fail(where + " has no subword ids");
    for (int s : w.subword_ids) {
      if (s < 0) fail(where + " has negative subword id");
    }
    if (w.frame_start >= w.frame_end) {
      fail(where + " has empty frame span [" + std::to_string(w.frame_start) + "," +
           std::to_string(w.frame_end) + ")");
    }
    if (w.frame_start < prev_end) {
      fail(where + " overlaps the previous word (starts at " + std::to_string(w.frame_start) +
           ", previous ends at " + std::to_string(prev_end) + ")");
    }
    if (w.frame_end > nf) {
      fail(where + " ends at frame " + std::to_string(w.frame_end) + " beyond " +
           std::to_string(nf) + " frames");
    }
    prev_end = w.frame_end;
  }
  if (!utt.labels.empty() || require_labels) {
    if (utt.labels.size() != utt.words.size()) {
      fail(std::to_string(utt.labels.size()) + " labels for " + std::to_string(utt.words.size()) +
           " words");
    }
    if (utt.labels.back() != BoundaryLevel::IPH) fail("final juncture is not IPH");
  }
}

std::vector<int> utterance_subwords(const UtteranceRecord& utt) {
  std::vector<int> seq;
  for (const auto& w : utt.words) {
    seq.insert(seq.end(), w.subword_ids.begin(), w.subword_ids.end());
    if (w.has_punct()) seq.push_back(punct_subword_id(w.punct));
  }
  return seq;
}

std::size_t count_words(const Corpus& corpus) {
  std::size_t n = 0;
  for (const auto& u : corpus) n += u.words.size();
  return n;
}

}  // namespace sswp::corpus
