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

#include "sswp/corpus/generator.h"

#include <cmath>
#include <cstdio>
#include <random>

#include "sswp/common/error.h"

namespace sswp::corpus {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Fixed salts keep the synthetic "language" identical across corpus seeds.
constexpr std::uint64_t kSubwordSalt = 0x5157'0001ULL;
constexpr std::uint64_t kProtoSalt = 0x5157'0002ULL;

std::vector<float> subword_prototype(int subword, int dim) {
  std::mt19937_64 rng(splitmix64(kProtoSalt ^ static_cast<std::uint64_t>(subword)));
  std::normal_distribution<float> n(0.0f, 1.0f);
  std::vector<float> v(dim);
  for (auto& x : v) x = n(rng);
  return v;
}

int uniform(std::mt19937_64& rng, const Range& r) {
  return std::uniform_int_distribution<int>(r.first, r.second)(rng);
}

struct PlannedWord {
  int vocab_id;
  BoundaryLevel label;
  int phrase;  // index of the enclosing phrase
};

}  // namespace

const Range& GeneratorConfig::silence_for(BoundaryLevel l) const {
  switch (l) {
    case BoundaryLevel::LW: return silence_lw;
    case BoundaryLevel::PW: return silence_pw;
    case BoundaryLevel::PPH: return silence_pph;
    case BoundaryLevel::IPH: return silence_iph;
  }
  return silence_lw;
}

void GeneratorConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("generator config: " + msg);
  };
  auto range_ok = [&](const Range& r, int min_allowed, const char* name) {
    need(r.first >= min_allowed && r.first <= r.second,
         std::string(name) + " must satisfy " + std::to_string(min_allowed) +
             " <= min <= max, got [" + std::to_string(r.first) + ", " +
             std::to_string(r.second) + "]");
  };
  need(num_utterances >= 1, "num_utterances must be >= 1");
  need(vocab_size >= 1, "vocab_size must be >= 1");
  need(subword_vocab_size >= 1, "subword_vocab_size must be >= 1");
  need(feat_dim >= 2, "feat_dim must be >= 2");
  range_ok(words_per_pw, 1, "words_per_pw");
  range_ok(pws_per_pph, 1, "pws_per_pph");
  range_ok(pphs_per_sentence, 1, "pphs_per_sentence");
  range_ok(word_frames, 1, "word_frames");
  range_ok(leading_silence, 0, "leading_silence");
  range_ok(silence_lw, 0, "silence_lw");
  range_ok(silence_pw, 0, "silence_pw");
  range_ok(silence_pph, 0, "silence_pph");
  range_ok(silence_iph, 0, "silence_iph");
  need(silence_pph.first > silence_lw.second,
       "silence_pph must not overlap silence_lw (acoustic separability)");
  need(comma_prob >= 0.0 && comma_prob <= 1.0, "comma_prob must lie in [0, 1]");
  need(noise_sigma >= 0.0, "noise_sigma must be >= 0");
}

GeneratorConfig GeneratorConfig::from_flat(const FlatConfig& f) {
  f.require_known({"seed", "num_utterances", "vocab_size", "subword_vocab_size", "feat_dim",
                   "words_per_pw", "pws_per_pph", "pphs_per_sentence", "word_frames",
                   "leading_silence", "silence_lw", "silence_pw", "silence_pph", "silence_iph",
                   "comma_prob", "noise_sigma"},
                  "generator config");
  GeneratorConfig c;
  c.seed = f.get_u64("seed", c.seed);
  c.num_utterances = f.get_int("num_utterances", c.num_utterances);
  c.vocab_size = f.get_int("vocab_size", c.vocab_size);
  c.subword_vocab_size = f.get_int("subword_vocab_size", c.subword_vocab_size);
  c.feat_dim = f.get_int("feat_dim", c.feat_dim);
  c.words_per_pw = f.get_range("words_per_pw", c.words_per_pw);
  c.pws_per_pph = f.get_range("pws_per_pph", c.pws_per_pph);
  c.pphs_per_sentence = f.get_range("pphs_per_sentence", c.pphs_per_sentence);
  c.word_frames = f.get_range("word_frames", c.word_frames);
  c.leading_silence = f.get_range("leading_silence", c.leading_silence);
  c.silence_lw = f.get_range("silence_lw", c.silence_lw);
  c.silence_pw = f.get_range("silence_pw", c.silence_pw);
  c.silence_pph = f.get_range("silence_pph", c.silence_pph);
  c.silence_iph = f.get_range("silence_iph", c.silence_iph);
  c.comma_prob = f.get_double("comma_prob", c.comma_prob);
  c.noise_sigma = f.get_double("noise_sigma", c.noise_sigma);
  return c;
}

GeneratorConfig GeneratorConfig::from_toml_file(const std::string& path) {
  return from_flat(FlatConfig::from_file(path));
}

std::string GeneratorConfig::to_toml() const {
  TomlWriter w;
  w.add("seed", seed)
      .add("num_utterances", num_utterances)
      .add("vocab_size", vocab_size)
      .add("subword_vocab_size", subword_vocab_size)
      .add("feat_dim", feat_dim)
      .add("words_per_pw", words_per_pw)
      .add("pws_per_pph", pws_per_pph)
      .add("pphs_per_sentence", pphs_per_sentence)
      .add("word_frames", word_frames)
      .add("leading_silence", leading_silence)
      .add("silence_lw", silence_lw)
      .add("silence_pw", silence_pw)
      .add("silence_pph", silence_pph)
      .add("silence_iph", silence_iph)
      .add("comma_prob", comma_prob)
      .add("noise_sigma", noise_sigma);
  return w.str();
}

std::vector<int> word_subwords(int word_id, int subword_vocab_size) {
  const std::uint64_t h = splitmix64(kSubwordSalt ^ static_cast<std::uint64_t>(word_id));
  const int n = 1 + static_cast<int>(h % 3);
  std::vector<int> ids;
  for (int k = 0; k < n; ++k) {
    const std::uint64_t hk = splitmix64(h + static_cast<std::uint64_t>(k) + 1);
    ids.push_back(kFirstWordSubword + static_cast<int>(hk % static_cast<std::uint64_t>(subword_vocab_size)));
  }
  return ids;
}

std::vector<float> word_identity(int word_id, int subword_vocab_size, int feat_dim) {
  const int dim = feat_dim - 1;
  const auto subs = word_subwords(word_id, subword_vocab_size);
  std::vector<float> v(dim, 0.0f);
  for (int s : subs) {
    const auto p = subword_prototype(s, dim);
    for (int c = 0; c < dim; ++c) v[c] += p[c];
  }
  const float norm = 1.0f / std::sqrt(static_cast<float>(subs.size()));
  for (auto& x : v) x *= norm;
  return v;
}

Corpus generate_corpus(const GeneratorConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<float> noise(0.0f, static_cast<float>(cfg.noise_sigma));
  std::uniform_int_distribution<int> vocab(0, cfg.vocab_size - 1);
  std::bernoulli_distribution comma(cfg.comma_prob);
  const int F = cfg.feat_dim;
  const int pitch_col = F - 1;
  const int long_min = (cfg.word_frames.first + cfg.word_frames.second + 1) / 2;

  Corpus corpus;
  corpus.reserve(cfg.num_utterances);
  for (int u = 0; u < cfg.num_utterances; ++u) {
    std::vector<PlannedWord> plan;
    const int n_pph = uniform(rng, cfg.pphs_per_sentence);
    for (int p = 0; p < n_pph; ++p) {
      const int n_pw = uniform(rng, cfg.pws_per_pph);
      for (int q = 0; q < n_pw; ++q) {
        const int n_w = uniform(rng, cfg.words_per_pw);
        for (int k = 0; k < n_w; ++k) {
          BoundaryLevel l = BoundaryLevel::LW;
          if (k + 1 == n_w) l = BoundaryLevel::PW;
          if (k + 1 == n_w && q + 1 == n_pw) l = BoundaryLevel::PPH;
          if (k + 1 == n_w && q + 1 == n_pw && p + 1 == n_pph) l = BoundaryLevel::IPH;
          plan.push_back({vocab(rng), l, p});
        }
      }
    }

    UtteranceRecord utt;
    char id[32];
    std::snprintf(id, sizeof(id), "syn%06d", u);
    utt.id = id;
    // Timeline: word lengths and the silence after each word.
    const int lead = uniform(rng, cfg.leading_silence);
    std::vector<int> word_len(plan.size()), sil_len(plan.size());
    int t = lead;
    for (std::size_t i = 0; i < plan.size(); ++i) {
      const bool phrase_final = plan[i].label >= BoundaryLevel::PPH;
      word_len[i] = phrase_final ? uniform(rng, {long_min, cfg.word_frames.second})
                                 : uniform(rng, cfg.word_frames);
      sil_len[i] = uniform(rng, cfg.silence_for(plan[i].label));
      WordToken w;
      w.text = "w" + std::to_string(plan[i].vocab_id);
      w.subword_ids = word_subwords(plan[i].vocab_id, cfg.subword_vocab_size);
      w.frame_start = t;
      w.frame_end = t + word_len[i];
      if (plan[i].label == BoundaryLevel::IPH) {
        w.punct = ".";
      } else if (plan[i].label == BoundaryLevel::PPH && comma(rng)) {
        w.punct = ",";
      }
      t = w.frame_end + sil_len[i];
      utt.words.push_back(std::move(w));
      utt.labels.push_back(plan[i].label);
    }
    const int total = t;

    utt.frames = diff::Tensor<float>::matrix(total, F);
    // Pitch declines from +1 to -1 over the speech frames of each phrase.
    std::size_t i = 0;
    while (i < plan.size()) {
      std::size_t j = i;
      int phrase_frames = 0;
      while (j < plan.size() && plan[j].phrase == plan[i].phrase) phrase_frames += word_len[j++];
      int pos = 0;
      for (std::size_t w = i; w < j; ++w) {
        const auto ident = word_identity(plan[w].vocab_id, cfg.subword_vocab_size, F);
        for (int f = utt.words[w].frame_start; f < utt.words[w].frame_end; ++f, ++pos) {
          auto row = utt.frames.row(f);
          std::copy(ident.begin(), ident.end(), row.begin());
          const float frac = phrase_frames > 1 ? static_cast<float>(pos) / (phrase_frames - 1) : 0.0f;
          row[pitch_col] = 1.0f - 2.0f * frac;
        }
      }
      i = j;
    }
    if (cfg.noise_sigma > 0.0) {
      for (auto& v : utt.frames.data()) v += noise(rng);
    }
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

}  // namespace sswp::corpus
