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

#include "sswp/contrastive/batching.h"

#include <string>

#include "sswp/common/error.h"

namespace sswp::con {

namespace {

void check_size(const corpus::UnitTable& table, int batch_size) {
  const auto total = table.all().size();
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (static_cast<std::size_t>(batch_size) > total) {
    throw DataError("corpus has " + std::to_string(total) + " units, fewer than batch_size " +
                    std::to_string(batch_size) + "; use a smaller batch");
  }
}

// Fisher-Yates with explicit index draws so the order does not depend on
// the standard library's shuffle implementation.
void shuffle(std::vector<corpus::UnitRef>& v, std::size_t prefix, std::mt19937_64& rng) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < prefix && i + 1 < n; ++i) {
    const std::size_t j = i + rng() % (n - i);
    std::swap(v[i], v[j]);
  }
}

}  // namespace

PairBatch assemble_pair_batch(const corpus::UnitTable& table, int batch_size,
                              std::mt19937_64& rng) {
  check_size(table, batch_size);
  auto all = table.all();
  shuffle(all, static_cast<std::size_t>(batch_size), rng);
  all.resize(static_cast<std::size_t>(batch_size));
  return {std::move(all)};
}

std::vector<PairBatch> epoch_batches(const corpus::UnitTable& table, int batch_size,
                                     std::mt19937_64& rng) {
  check_size(table, batch_size);
  auto all = table.all();
  shuffle(all, all.size(), rng);
  std::vector<PairBatch> out;
  for (std::size_t b = 0; b < all.size(); b += static_cast<std::size_t>(batch_size)) {
    const std::size_t e = std::min(all.size(), b + static_cast<std::size_t>(batch_size));
    if (e - b < 2) break;
    out.push_back({{all.begin() + static_cast<std::ptrdiff_t>(b), all.begin() + static_cast<std::ptrdiff_t>(e)}});
  }
  return out;
}

}  // namespace sswp::con
