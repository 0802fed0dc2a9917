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

#include "sswp/corpus/split.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sswp/common/error.h"

namespace sswp::corpus {

namespace {

std::vector<int> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  // Explicit Fisher-Yates: std::shuffle's sequence is implementation-defined.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

CorpusSplit take(const Corpus& corpus, const std::vector<int>& perm, int n_train, int n_valid,
                 int n_test) {
  std::vector<int> part(corpus.size(), -1);
  for (int i = 0; i < n_train + n_valid + n_test; ++i) {
    part[perm[i]] = i < n_train ? 0 : (i < n_train + n_valid ? 1 : 2);
  }
  CorpusSplit s;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (part[i] == 0) s.train.push_back(corpus[i]);
    if (part[i] == 1) s.valid.push_back(corpus[i]);
    if (part[i] == 2) s.test.push_back(corpus[i]);
  }
  return s;
}

}  // namespace

CorpusSplit split_corpus(const Corpus& corpus, std::array<double, 3> fractions,
                         std::uint64_t seed) {
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ConfigError("split fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ConfigError("split fractions must sum to 1");
  const int n = static_cast<int>(corpus.size());
  const int n_train = static_cast<int>(std::lround(fractions[0] * n));
  const int n_valid = std::min(n - n_train, static_cast<int>(std::lround(fractions[1] * n)));
  return take(corpus, permutation(corpus.size(), seed), n_train, n_valid, n - n_train - n_valid);
}

CorpusSplit split_corpus_counts(const Corpus& corpus, int train, int valid, int test,
                                std::uint64_t seed) {
  if (train < 0 || valid < 0 || test < 0) throw ConfigError("split counts must be >= 0");
  if (static_cast<std::size_t>(train + valid + test) > corpus.size()) {
    throw ConfigError("split counts " + std::to_string(train + valid + test) + " exceed corpus size " +
                      std::to_string(corpus.size()));
  }
  return take(corpus, permutation(corpus.size(), seed), train, valid, test);
}

}  // namespace sswp::corpus
