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

#ifndef SSWP_CORPUS_IO_H_
#define SSWP_CORPUS_IO_H_

#include <string>

#include "sswp/corpus/types.h"

namespace sswp::corpus {

inline constexpr char kCorpusFileName[] = "corpus.jsonl";
inline constexpr std::uint32_t kFeatureVersion = 1;

// Writes `dir`/corpus.jsonl plus one feature file per utterance under
// `dir`/feats/. Returns the path of the JSON Lines file.
std::string save_corpus(const Corpus& corpus, const std::string& dir);

// Reads a JSON Lines corpus; `path` may be the .jsonl file or its directory.
// Feature paths resolve relative to the .jsonl file. Unlabeled records
// (missing or empty "labels") are accepted when require_labels is false.
Corpus load_corpus(const std::string& path, bool require_labels = true);

// Feature file: "SSWF", u32 version, u32 rows, u32 cols, rows*cols f32 LE.
void write_features(const diff::Tensor<float>& frames, const std::string& path);
diff::Tensor<float> read_features(const std::string& path, const std::string& utt_id);

}  // namespace sswp::corpus

#endif  // SSWP_CORPUS_IO_H_
