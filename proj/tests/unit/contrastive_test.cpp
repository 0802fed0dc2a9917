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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "sswp/common/error.h"
#include "sswp/contrastive/batching.h"
#include "sswp/contrastive/loss.h"
#include "sswp/contrastive/pretrain.h"
#include "sswp/corpus/generator.h"
#include "sswp/diffcore/binder.h"
#include "sswp/diffcore/gradcheck.h"

namespace sswp::con {
namespace {

using diff::Graph;
using diff::ParamStore;
using diff::Tensor;

template <typename T>
Tensor<T> random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0, 1);
  Tensor<T> t = Tensor<T>::matrix(r, c);
  for (auto& v : t.data()) v = static_cast<T>(n(rng));
  return t;
}

template <typename T>
T loss_of(const Tensor<T>& s, const Tensor<T>& t, double tau) {
  Graph<T> g(false);
  auto theta = g.constant(Tensor<T>::scalar(static_cast<T>(std::log(tau))));
  return contrastive_loss(g.constant(s), g.constant(t), theta).value().item();
}

TEST(ContrastiveLoss, SingletonBatchIsExactlyZero) {
  std::mt19937_64 rng(1);
  auto s = random_matrix<double>(1, 5, rng);
  auto t = random_matrix<double>(1, 5, rng);
  EXPECT_EQ(loss_of(s, t, 0.07), 0.0);
  EXPECT_EQ(loss_of(s.cast<float>(), t.cast<float>(), 0.07), 0.0f);
}

TEST(ContrastiveLoss, IdentityPairOracle) {
  Tensor<double> eye({2, 2}, std::vector<double>{1, 0, 0, 1});
  // -log(e / (e + 1)), evaluated independently.
  EXPECT_NEAR(loss_of(eye, eye, 1.0), 0.3132616875182228, 1e-6);
  EXPECT_NEAR(loss_of(eye.cast<float>(), eye.cast<float>(), 1.0), 0.3132616875182228, 1e-6);
}

TEST(ContrastiveLoss, SymmetricExactlyOnRandomBatches) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 16);
    const int d = 1 + static_cast<int>(rng() % 12);
    const double tau = 0.01 + (rng() % 1000) / 1000.0 * 0.99;
    auto s = random_matrix<float>(n, d, rng);
    auto t = random_matrix<float>(n, d, rng);
    ASSERT_EQ(loss_of(s, t, tau), loss_of(t, s, tau)) << "trial " << trial;
    auto sd = s.cast<double>(), td = t.cast<double>();
    ASSERT_EQ(loss_of(sd, td, tau), loss_of(td, sd, tau)) << "trial " << trial;
  }
}

TEST(ContrastiveLoss, JointRowPermutationLeavesLossUnchanged) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 12);
    auto s = random_matrix<double>(n, 6, rng);
    auto t = random_matrix<double>(n, 6, rng);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto ps = s, pt = t;
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 6; ++c) {
        ps.at(i, c) = s.at(perm[i], c);
        pt.at(i, c) = t.at(perm[i], c);
      }
    }
    ASSERT_NEAR(loss_of(s, t, 0.1), loss_of(ps, pt, 0.1), 1e-6);
  }
}

TEST(ContrastiveLoss, NonNegativeAndPositiveForDistinctRows) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_matrix<double>(8, 4, rng);
    auto t = random_matrix<double>(8, 4, rng);
    EXPECT_GT(loss_of(s, t, 0.07), 0.0);
  }
}

TEST(ContrastiveLoss, LogitsBoundedAtMinimumTemperature) {
  std::mt19937_64 rng(5);
  Graph<double> g(false);
  auto s = g.constant(random_matrix<double>(10, 4, rng) );
  auto t = g.constant(random_matrix<double>(10, 4, rng));
  auto logits = similarity_logits(s, t, g.constant(Tensor<double>::scalar(std::log(kTauMin))));
  for (double v : logits.value().data()) {
    EXPECT_LE(std::abs(v), 100.0 + 1e-9);
  }
}

TEST(ContrastiveLoss, RejectsEmptyAndMismatchedBatches) {
  Graph<double> g(false);
  auto theta = g.constant(Tensor<double>::scalar(0.0));
  auto a = g.constant(Tensor<double>::matrix(3, 4));
  auto b = g.constant(Tensor<double>::matrix(2, 4));
  auto c = g.constant(Tensor<double>::matrix(3, 5));
  EXPECT_THROW(contrastive_loss(a, b, theta), ShapeError);
  EXPECT_THROW(contrastive_loss(a, c, theta), ShapeError);
}

TEST(ContrastiveLoss, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(6);
  ParamStore<double> ps;
  ps.add("s", random_matrix<double>(4, 8, rng));
  ps.add("t", random_matrix<double>(4, 8, rng));
  ps.add("theta", Tensor<double>::scalar(std::log(0.3)));
  auto r = diff::check_gradients("contrastive_loss", ps, [&](Graph<double>& g) {
    diff::Binder<double> bind(g, ps);
    return contrastive_loss(bind("s"), bind("t"), bind("theta"));
  });
  EXPECT_TRUE(r.passed) << r.worst_param << " " << r.max_rel_error;
  EXPECT_EQ(r.coords_checked, 65u);
}

TEST(Retrieval, CountsDiagonalArgmaxRows) {
  Tensor<double> l({3, 3}, std::vector<double>{5, 1, 0,  //
                                               2, 1, 0,  //
                                               0, 0, 9});
  EXPECT_NEAR(retrieval_top1(l), 2.0 / 3.0, 1e-15);
}

TEST(Temperature, ClampKeepsTauInRange) {
  ParamStore<float> ps;
  add_temperature(ps);
  EXPECT_NEAR(temperature(ps), 0.07, 1e-6);
  ps.get(kThetaName).value[0] = -20.0f;
  clamp_temperature(ps);
  EXPECT_NEAR(temperature(ps), kTauMin, 1e-6);
  ps.get(kThetaName).value[0] = 3.0f;
  clamp_temperature(ps);
  EXPECT_NEAR(temperature(ps), kTauMax, 1e-6);
  ParamStore<float> bad;
  EXPECT_THROW(add_temperature(bad, 2.0), ConfigError);
}

corpus::Corpus tiny_corpus(int utterances = 12) {
  corpus::GeneratorConfig gc;
  gc.seed = 4;
  gc.num_utterances = utterances;
  gc.vocab_size = 60;
  return corpus::generate_corpus(gc);
}

TEST(PairBatching, FullBatchHoldsEveryUnitOnce) {
  const auto c = tiny_corpus();
  const corpus::UnitTable table(c, corpus::UnitMode::kSswp);
  std::mt19937_64 rng(7);
  const int n = static_cast<int>(table.all().size());
  const auto b = assemble_pair_batch(table, n, rng);
  std::set<corpus::UnitRef> seen(b.units.begin(), b.units.end());
  EXPECT_EQ(static_cast<int>(seen.size()), n);
  EXPECT_EQ(seen, std::set<corpus::UnitRef>(table.all().begin(), table.all().end()));
}

TEST(PairBatching, DeterministicAndDuplicateFree) {
  const auto c = tiny_corpus();
  const corpus::UnitTable table(c, corpus::UnitMode::kSswp);
  std::mt19937_64 r1(8), r2(8);
  for (int i = 0; i < 20; ++i) {
    const auto a = assemble_pair_batch(table, 16, r1);
    const auto b = assemble_pair_batch(table, 16, r2);
    ASSERT_EQ(a.units, b.units);
    ASSERT_EQ(std::set<corpus::UnitRef>(a.units.begin(), a.units.end()).size(), a.units.size());
  }
}

TEST(PairBatching, EpochCoversEveryUnitOnce) {
  const auto c = tiny_corpus();
  const corpus::UnitTable table(c, corpus::UnitMode::kSswp);
  std::mt19937_64 rng(9);
  const auto batches = epoch_batches(table, 10, rng);
  std::multiset<corpus::UnitRef> seen;
  for (const auto& b : batches) {
    EXPECT_GE(b.units.size(), 2u);
    seen.insert(b.units.begin(), b.units.end());
  }
  const std::size_t n = table.all().size();
  EXPECT_EQ(seen.size(), n % 10 == 1 ? n - 1 : n);
  EXPECT_EQ(std::set<corpus::UnitRef>(seen.begin(), seen.end()).size(), seen.size());
}

TEST(PairBatching, TooSmallCorpusSuggestsSmallerBatch) {
  const auto c = tiny_corpus(2);
  const corpus::UnitTable table(c, corpus::UnitMode::kSswp);
  std::mt19937_64 rng(10);
  try {
    assemble_pair_batch(table, 10000, rng);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("smaller batch"), std::string::npos);
  }
}

PretrainConfig tiny_pretrain() {
  PretrainConfig p;
  p.epochs = 2;
  p.batch_size = 16;
  p.lr0 = 1e-3;
  p.seed = 3;
  p.model.text.dim = 16;
  p.model.text.layers = 1;
  p.model.text.heads = 2;
  p.model.audio.dim = 16;
  p.model.audio.layers = 1;
  p.model.audio.heads = 2;
  p.model.joint_dim = 8;
  return p;
}

TEST(Pretrain, SameSeedGivesBitIdenticalLogs) {
  const auto c = tiny_corpus();
  const auto a = pretrain(c, tiny_pretrain());
  const auto b = pretrain(c, tiny_pretrain());
  ASSERT_EQ(a.log.size(), 3u);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].mean_loss, b.log[i].mean_loss);
    EXPECT_EQ(a.log[i].retrieval_top1, b.log[i].retrieval_top1);
    EXPECT_EQ(a.log[i].tau, b.log[i].tau);
  }
  for (const auto& p : a.params) {
    const auto x = p->value.data();
    const auto y = b.params.get(p->name).value.data();
    EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin(), y.end())) << p->name;
  }
  EXPECT_TRUE(a.params.contains(kThetaName));
}

TEST(Pretrain, ChanceRetrievalAtInitialization) {
  const auto c = tiny_corpus(60);
  auto cfg = tiny_pretrain();
  cfg.epochs = 0;
  cfg.batch_size = 32;
  double acc = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    acc += pretrain(c, cfg).log.at(0).retrieval_top1 / 5;
  }
  EXPECT_LT(acc, 4.0 / 32);
}

TEST(Pretrain, LossDecreasesOnTinyCorpus) {
  const auto c = tiny_corpus(30);
  auto cfg = tiny_pretrain();
  cfg.epochs = 6;
  const auto r = pretrain(c, cfg);
  EXPECT_LT(r.log.back().mean_loss, r.log.front().mean_loss);
  for (const auto& e : r.log) {
    EXPECT_GE(e.tau, kTauMin);
    EXPECT_LE(e.tau, kTauMax);
  }
}

TEST(Pretrain, NonFiniteLossAbortsWithLocation) {
  const auto c = tiny_corpus();
  auto cfg = tiny_pretrain();
  ParamStore<float> init;
  init.add("audio.proj.b", Tensor<float>({1, 8}, std::numeric_limits<float>::quiet_NaN()));
  try {
    pretrain(c, cfg, {}, &init);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 0"), std::string::npos) << e.what();
  }
}

TEST(Pretrain, IncompatibleInitListsTensors) {
  const auto c = tiny_corpus();
  ParamStore<float> init;
  init.add("text.proj.w", Tensor<float>::matrix(3, 3));
  try {
    pretrain(c, tiny_pretrain(), {}, &init);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("text.proj.w"), std::string::npos);
  }
}

TEST(Pretrain, CsvHasHeaderAndOneRowPerEpoch) {
  const auto c = tiny_corpus();
  const auto r = pretrain(c, tiny_pretrain());
  const auto path = std::filesystem::temp_directory_path() / "sswp_pretrain_log.csv";
  write_epoch_csv(path.string(), r.log);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "epoch,mean_loss,retrieval_top1,lr,tau");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(PretrainConfig, TomlRoundTrip) {
  auto cfg = tiny_pretrain();
  cfg.unit_mode = corpus::UnitMode::kWordOnly;
  cfg.checkpoint_out = "out/enc.ckpt";
  TomlWriter w;
  cfg.write_toml(w);
  const auto back = PretrainConfig::from_flat(FlatConfig::from_string(w.str()));
  EXPECT_EQ(back.epochs, cfg.epochs);
  EXPECT_EQ(back.lr0, cfg.lr0);
  EXPECT_EQ(back.unit_mode, cfg.unit_mode);
  EXPECT_EQ(back.checkpoint_out, cfg.checkpoint_out);
  EXPECT_EQ(back.model, cfg.model);
  EXPECT_THROW(PretrainConfig::from_flat(FlatConfig::from_string("[pretrain]\nepochz = 3\n")), ConfigError);
}

TEST(Mlm, LossDecreasesAndHeadIsDropped) {
  const auto c = tiny_corpus(30);
  MlmConfig cfg;
  cfg.epochs = 8;
  cfg.batch_size = 8;
  cfg.model = tiny_pretrain().model;
  const auto r = mlm_pretrain(c, cfg);
  ASSERT_EQ(r.epoch_loss.size(), 8u);
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
  for (const auto& p : r.params) {
    EXPECT_EQ(p->name.rfind("text.", 0), 0u);
    EXPECT_NE(p->name.rfind("text.mlm", 0), 0u);
  }
}

}  // namespace
}  // namespace sswp::con
