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

#ifndef SSWP_CORPUS_GENERATOR_H_
#define SSWP_CORPUS_GENERATOR_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sswp/common/flat_config.h"
#include "sswp/corpus/types.h"

namespace sswp::corpus {

using Range = std::pair<int, int>;  // inclusive [min, max]

struct GeneratorConfig {
  std::uint64_t seed = 1;
  int num_utterances = 1200;
  int vocab_size = 1000;
  int subword_vocab_size = 512;
  int feat_dim = 16;
  Range words_per_pw{1, 3};
  Range pws_per_pph{1, 3};
  Range pphs_per_sentence{1, 3};
  Range word_frames{5, 15};
  Range leading_silence{0, 3};
  Range silence_lw{0, 0};
  Range silence_pw{0, 1};
  Range silence_pph{2, 6};
  Range silence_iph{8, 15};
  double comma_prob = 0.7;
  double noise_sigma = 0.1;

  const Range& silence_for(BoundaryLevel l) const;
  // Throws ConfigError.
  void validate() const;

  static GeneratorConfig from_flat(const FlatConfig& flat);
  static GeneratorConfig from_toml_file(const std::string& path);
  std::string to_toml() const;
};

// Synthetic aligned corpus. Sentences follow a three-level grammar
// (phrase -> prosodic word -> word). Acoustic frames carry a per-word identity
// vector, a pitch channel that declines linearly across each phrase,
// phrase-final lengthening, level-dependent silences and Gaussian noise.
// Punctuation: "." at the end, "," at phrase ends with probability comma_prob.
Corpus generate_corpus(const GeneratorConfig& cfg);

// Subword ids assigned to a vocabulary entry (1 to 3 ids, deterministic).
std::vector<int> word_subwords(int word_id, int subword_vocab_size);

// Acoustic identity vector (feat_dim - 1 values) of a vocabulary entry.
std::vector<float> word_identity(int word_id, int subword_vocab_size, int feat_dim);

}  // namespace sswp::corpus

#endif  // SSWP_CORPUS_GENERATOR_H_
