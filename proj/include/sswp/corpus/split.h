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

#ifndef SSWP_CORPUS_SPLIT_H_
#define SSWP_CORPUS_SPLIT_H_

#include <array>
#include <cstdint>

#include "sswp/corpus/types.h"

namespace sswp::corpus {

struct CorpusSplit {
  Corpus train;
  Corpus valid;
  Corpus test;
};

// Seeded utterance-level partition. Sizes are round(f * n) for train and
// valid; test takes the remainder. Each part keeps corpus order.
CorpusSplit split_corpus(const Corpus& corpus, std::array<double, 3> fractions,
                         std::uint64_t seed);

// Same partition expressed as absolute counts; counts must not exceed n.
CorpusSplit split_corpus_counts(const Corpus& corpus, int train, int valid, int test,
                                std::uint64_t seed);

}  // namespace sswp::corpus

#endif  // SSWP_CORPUS_SPLIT_H_
