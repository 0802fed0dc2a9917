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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <cstring>

#include "sswp/common/error.h"
#include "sswp/corpus/generator.h"
#include "sswp/corpus/io.h"
#include "sswp/corpus/split.h"
#include "sswp/corpus/units.h"

namespace sswp::corpus {
namespace {

namespace fs = std::filesystem;
using L = BoundaryLevel;

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("sswp_corpus_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

UtteranceRecord table_one_sentence() {
  const char* words[] = {"We", "must", "urge", "representatives", "to", "push", "for", "reforms"};
  UtteranceRecord u;
  u.id = "table1";
  int t = 3;
  for (int i = 0; i < 8; ++i) {
    WordToken w;
    w.text = words[i];
    w.subword_ids = {kFirstWordSubword + i};
    w.frame_start = t;
    w.frame_end = t + 10;
    t = w.frame_end + (i == 3 ? 4 : 0);
    u.words.push_back(w);
  }
  u.words.back().punct = ".";
  u.labels = {L::LW, L::PW, L::LW, L::PPH, L::LW, L::LW, L::LW, L::IPH};
  u.frames = diff::Tensor<float>::matrix(t + 9, 4);
  return u;
}

UtteranceRecord two_words(int a_end, int b_start) {
  UtteranceRecord u;
  u.id = "pair";
  u.words = {WordToken{"a", "", {9}, 100, a_end}, WordToken{"b", ".", {10}, b_start, b_start + 5}};
  u.labels = {L::PW, L::IPH};
  u.frames = diff::Tensor<float>::matrix(b_start + 5, 3);
  return u;
}

TEST(SswpUnits, TableOneSentence) {
  const auto u = table_one_sentence();
  const auto units = build_sswp_units(u);
  ASSERT_EQ(units.size(), 8u);
  const std::vector<L> want = {L::LW, L::PW, L::LW, L::PPH, L::LW, L::LW, L::LW, L::IPH};
  for (int i = 0; i < 8; ++i) EXPECT_EQ(units[i].label, want[i]);
  EXPECT_EQ(units[7].text_span, "reforms.");
  // punctuation gets its own subword inside the final unit's range
  EXPECT_EQ(units[7].num_subwords(), 2);
  EXPECT_EQ(units[3].silence_frames, 4);
  EXPECT_EQ(units[7].frame_end, u.num_frames());
}

TEST(SswpUnits, SilenceAttachesToPrecedingWord) {
  const auto units = build_sswp_units(two_words(120, 128));
  EXPECT_EQ(units[0].frame_end, 128);
  EXPECT_EQ(units[0].silence_frames, 8);
}

TEST(SswpUnits, ZeroGapIsValid) {
  const auto units = build_sswp_units(two_words(120, 120));
  EXPECT_EQ(units[0].frame_end, 120);
  EXPECT_EQ(units[0].silence_frames, 0);
}

TEST(SswpUnits, OverlapIsRejectedWithUtteranceId) {
  try {
    build_sswp_units(two_words(125, 120));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("pair"), std::string::npos);
  }
}

TEST(SswpUnits, WordOnlyModeStripsPunctuationAndSilence) {
  const auto units = build_sswp_units(two_words(120, 128), UnitMode::kWordOnly);
  EXPECT_EQ(units[0].frame_end, 120);
  EXPECT_EQ(units[1].text_span, "b");
  EXPECT_EQ(units[1].num_subwords(), 1);
  EXPECT_EQ(units[1].frame_end, 133);
}

GeneratorConfig small_config(int n = 200) {
  GeneratorConfig c;
  c.seed = 17;
  c.num_utterances = n;
  return c;
}

TEST(Generator, SameSeedGivesByteIdenticalFiles) {
  const auto a = temp_dir("det_a");
  const auto b = temp_dir("det_b");
  save_corpus(generate_corpus(small_config(30)), a.string());
  save_corpus(generate_corpus(small_config(30)), b.string());
  EXPECT_EQ(slurp(a / kCorpusFileName), slurp(b / kCorpusFileName));
  for (const auto& e : fs::directory_iterator(a / "feats")) {
    EXPECT_EQ(slurp(e.path()), slurp(b / "feats" / e.path().filename())) << e.path();
  }
}

TEST(Generator, CommaProbabilityOnePunctuatesEveryPhrase) {
  auto cfg = small_config();
  cfg.comma_prob = 1.0;
  for (const auto& u : generate_corpus(cfg)) {
    for (const auto& unit : build_sswp_units(u)) {
      const char last = unit.text_span.back();
      if (unit.label == L::PPH) {
        EXPECT_EQ(last, ',');
      } else if (unit.label == L::IPH) {
        EXPECT_EQ(last, '.');
      } else {
        EXPECT_NE(last, ',');
      }
    }
  }
}

TEST(Generator, SilenceHistogramMatchesConfiguredRanges) {
  const auto cfg = GeneratorConfig{};
  std::map<L, std::pair<int, int>> seen;
  for (const auto& u : generate_corpus(cfg)) {
    for (const auto& unit : build_sswp_units(u)) {
      auto it = seen.find(unit.label);
      if (it == seen.end()) {
        seen[unit.label] = {unit.silence_frames, unit.silence_frames};
      } else {
        it->second.first = std::min(it->second.first, unit.silence_frames);
        it->second.second = std::max(it->second.second, unit.silence_frames);
      }
    }
  }
  for (L l : {L::LW, L::PW, L::PPH, L::IPH}) {
    ASSERT_TRUE(seen.count(l));
    EXPECT_EQ(seen[l], cfg.silence_for(l)) << level_name(l);
  }
}

// Re-parses labels as a bracketing: every phrase contains whole prosodic
// words, the sentence contains whole phrases, and it closes exactly once.
bool well_formed(const std::vector<L>& labels) {
  for (std::size_t i = 0; i + 1 < labels.size(); ++i) {
    if (labels[i] == L::IPH) return false;
  }
  return !labels.empty() && labels.back() == L::IPH;
}

TEST(Generator, LabelsAreWellFormedAndLwIsMajority) {
  const auto corpus = generate_corpus(GeneratorConfig{});
  std::array<int, 4> counts{};
  int total = 0;
  const GeneratorConfig cfg;
  for (const auto& u : corpus) {
    EXPECT_TRUE(well_formed(u.labels)) << u.id;
    // group sizes implied by the labels stay inside the grammar's ranges
    int words_in_pw = 0, pws_in_pph = 0, pphs = 0;
    for (L l : u.labels) {
      ++counts[to_int(l)];
      ++total;
      ++words_in_pw;
      if (l >= L::PW) {
        EXPECT_LE(words_in_pw, cfg.words_per_pw.second);
        words_in_pw = 0;
        ++pws_in_pph;
      }
      if (l >= L::PPH) {
        EXPECT_LE(pws_in_pph, cfg.pws_per_pph.second);
        pws_in_pph = 0;
        ++pphs;
      }
    }
    EXPECT_LE(pphs, cfg.pphs_per_sentence.second);
  }
  EXPECT_GT(counts[0], 0.4 * total);
  for (int c : counts) EXPECT_GT(c, 0);
}

TEST(Generator, UnitSpansTileTheUtterance) {
  for (const auto& u : generate_corpus(small_config(50))) {
    const auto units = build_sswp_units(u);
    int t = u.words.front().frame_start;
    for (const auto& unit : units) {
      EXPECT_EQ(unit.frame_begin, t);
      EXPECT_GE(unit.silence_frames, 0);
      t = unit.frame_end;
    }
    EXPECT_EQ(t, u.num_frames());
    EXPECT_EQ(units.back().subword_end, static_cast<int>(utterance_subwords(u).size()));
  }
}

TEST(Generator, RejectsOverlappingSilenceRanges) {
  GeneratorConfig c;
  c.silence_pph = {0, 4};
  EXPECT_THROW(c.validate(), ConfigError);
  c = GeneratorConfig{};
  c.num_utterances = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Generator, TomlRoundTrip) {
  GeneratorConfig c;
  c.seed = 99;
  c.comma_prob = 0.25;
  c.silence_iph = {9, 12};
  const auto back = GeneratorConfig::from_flat(FlatConfig::from_string(c.to_toml()));
  EXPECT_EQ(back.to_toml(), c.to_toml());
  EXPECT_THROW(GeneratorConfig::from_flat(FlatConfig::from_string("sead = 3\n")), ConfigError);
}

TEST(CorpusIo, RoundTripIsExact) {
  const auto dir = temp_dir("roundtrip");
  auto corpus = generate_corpus(small_config(20));
  corpus.push_back(table_one_sentence());
  save_corpus(corpus, dir.string());
  const auto back = load_corpus(dir.string());
  ASSERT_EQ(back.size(), corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_EQ(back[i].id, corpus[i].id);
    EXPECT_EQ(back[i].labels, corpus[i].labels);
    EXPECT_EQ(back[i].frames.dims(), corpus[i].frames.dims());
    EXPECT_EQ(0, std::memcmp(back[i].frames.data().data(), corpus[i].frames.data().data(),
                             corpus[i].frames.size() * sizeof(float)));
    ASSERT_EQ(back[i].words.size(), corpus[i].words.size());
    for (std::size_t w = 0; w < corpus[i].words.size(); ++w) {
      EXPECT_EQ(back[i].words[w].text, corpus[i].words[w].text);
      EXPECT_EQ(back[i].words[w].punct, corpus[i].words[w].punct);
      EXPECT_EQ(back[i].words[w].subword_ids, corpus[i].words[w].subword_ids);
      EXPECT_EQ(back[i].words[w].frame_start, corpus[i].words[w].frame_start);
      EXPECT_EQ(back[i].words[w].frame_end, corpus[i].words[w].frame_end);
    }
  }
}

TEST(CorpusIo, TruncatedFeatureFileNamesUtterance) {
  const auto dir = temp_dir("truncated");
  save_corpus(generate_corpus(small_config(3)), dir.string());
  const auto victim = dir / "feats" / "syn000001.sswf";
  fs::resize_file(victim, fs::file_size(victim) - 6);
  try {
    load_corpus(dir.string());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("syn000001"), std::string::npos) << e.what();
  }
}

TEST(CorpusIo, EmptyFileGivesEmptyCorpus) {
  const auto dir = temp_dir("empty");
  std::ofstream(dir / kCorpusFileName).close();
  EXPECT_TRUE(load_corpus(dir.string()).empty());
}

TEST(CorpusIo, MalformedLineReportsLineNumber) {
  const auto dir = temp_dir("malformed");
  save_corpus(generate_corpus(small_config(2)), dir.string());
  {
    std::ofstream out(dir / kCorpusFileName, std::ios::app);
    out << "{\"id\": \"broken\", \"words\": [\n";
  }
  try {
    load_corpus(dir.string());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST(CorpusIo, LabelOutOfRangeIsRejected) {
  const auto dir = temp_dir("badlabel");
  save_corpus(generate_corpus(small_config(1)), dir.string());
  std::string text = slurp(dir / kCorpusFileName);
  const auto pos = text.find("\"labels\":[");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos + 10, 1, "7");
  std::ofstream(dir / kCorpusFileName, std::ios::binary) << text;
  EXPECT_THROW(load_corpus(dir.string()), DataError);
}

TEST(Split, SizesAndDeterminism) {
  const auto corpus = generate_corpus(small_config(10));
  const auto s = split_corpus(corpus, {0.8, 0.1, 0.1}, 5);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.valid.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
  const auto again = split_corpus(corpus, {0.8, 0.1, 0.1}, 5);
  auto ids = [](const Corpus& c) {
    std::vector<std::string> v;
    for (const auto& u : c) v.push_back(u.id);
    return v;
  };
  EXPECT_EQ(ids(s.train), ids(again.train));
  EXPECT_EQ(ids(s.test), ids(again.test));
}

TEST(Split, PartitionIsDisjointAndExhaustive) {
  const auto corpus = generate_corpus(small_config(57));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = split_corpus(corpus, {0.6, 0.25, 0.15}, seed);
    std::multiset<std::string> all;
    for (const auto* part : {&s.train, &s.valid, &s.test}) {
      for (const auto& u : *part) all.insert(u.id);
    }
    EXPECT_EQ(all.size(), corpus.size());
    EXPECT_EQ(std::set<std::string>(all.begin(), all.end()).size(), corpus.size());
  }
}

TEST(Split, RejectsNonPositiveFraction) {
  const auto corpus = generate_corpus(small_config(10));
  EXPECT_THROW(split_corpus(corpus, {1.0, 0.0, 0.0}, 1), ConfigError);
  EXPECT_THROW(split_corpus(corpus, {0.5, 0.2, 0.2}, 1), ConfigError);
}

}  // namespace
}  // namespace sswp::corpus
