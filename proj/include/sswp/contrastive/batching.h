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

#ifndef SSWP_CONTRASTIVE_BATCHING_H_
#define SSWP_CONTRASTIVE_BATCHING_H_

#include <random>
#include <vector>

#include "sswp/corpus/units.h"

namespace sswp::con {

// Distinct units drawn across utterances. Row i of the speech and text
// embeddings of a batch corresponds to units[i].
struct PairBatch {
  std::vector<corpus::UnitRef> units;
};

// Uniform draw of batch_size distinct units.
PairBatch assemble_pair_batch(const corpus::UnitTable& table, int batch_size,
                              std::mt19937_64& rng);

// One pass over all units in shuffled order. A trailing batch with fewer
// than two units is dropped because it has no negatives.
std::vector<PairBatch> epoch_batches(const corpus::UnitTable& table, int batch_size,
                                     std::mt19937_64& rng);

}  // namespace sswp::con

#endif  // SSWP_CONTRASTIVE_BATCHING_H_
