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

#include "sswp/contrastive/pretrain.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>

#include "sswp/common/error.h"
#include "sswp/contrastive/batching.h"
#include "sswp/contrastive/loss.h"
#include "sswp/diffcore/binder.h"
#include "sswp/diffcore/optim.h"
#include "sswp/encoders/encoders.h"
#include "sswp/encoders/unit_inputs.h"

namespace sswp::con {

using diff::Binder;
using diff::Graph;
using diff::ParamStore;

namespace {

// Independent streams derived from one seed.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kBatchStream = 1;
constexpr std::uint64_t kEvalStream = 2;

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

void check_finite(double loss, const std::string& what, int epoch, int step) {
  if (!std::isfinite(loss)) {
    throw NumericError(what + ": non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                       std::to_string(step));
  }
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

struct BatchOutcome {
  double loss = 0.0;
  double retrieval = 0.0;
};

BatchOutcome run_batch(Binder<float>& bind, const enc::EncoderConfig& model,
                       const corpus::UnitTable& table, const PairBatch& batch,
                       diff::Expr<float>* loss_out) {
  auto emb = enc::embed_units(bind, model, table, batch.units);
  auto logits = similarity_logits(emb.audio, emb.text, bind(kThetaName));
  auto loss = contrastive_loss_from_logits(logits);
  if (loss_out) *loss_out = loss;
  return {static_cast<double>(loss.value().item()), retrieval_top1(logits.value())};
}

}  // namespace

void PretrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("pretrain.epochs must be >= 0");
  if (batch_size < 2) throw ConfigError("pretrain.batch_size must be >= 2");
  if (!(lr0 > 0) || lr_min < 0 || lr_min > lr0) throw ConfigError("pretrain: need 0 <= lr_min <= lr0, lr0 > 0");
  if (!(grad_clip >= 0)) throw ConfigError("pretrain.grad_clip must be >= 0");
  if (!(tau_init >= kTauMin && tau_init <= kTauMax)) throw ConfigError("pretrain.tau_init must lie in [0.01, 1]");
  model.validate();
}

PretrainConfig PretrainConfig::from_flat(const FlatConfig& f) {
  PretrainConfig c;
  const auto p = f.subtree("pretrain");
  p.require_known({"epochs", "batch_size", "lr0", "lr_min", "grad_clip", "tau_init", "seed",
                   "unit_mode", "checkpoint_out"},
                  "pretrain");
  c.epochs = p.get_int("epochs", c.epochs);
  c.batch_size = p.get_int("batch_size", c.batch_size);
  c.lr0 = p.get_double("lr0", c.lr0);
  c.lr_min = p.get_double("lr_min", c.lr_min);
  c.grad_clip = p.get_double("grad_clip", c.grad_clip);
  c.tau_init = p.get_double("tau_init", c.tau_init);
  c.seed = p.get_u64("seed", c.seed);
  c.unit_mode = corpus::parse_unit_mode(p.get_string("unit_mode", "sswp"));
  c.checkpoint_out = p.get_string("checkpoint_out", c.checkpoint_out);
  c.model = enc::EncoderConfig::from_flat(f.subtree("model"));
  return c;
}

void PretrainConfig::write_toml(TomlWriter& w, bool include_model) const {
  w.section("pretrain")
      .add("epochs", epochs)
      .add("batch_size", batch_size)
      .add("lr0", lr0)
      .add("lr_min", lr_min)
      .add("grad_clip", grad_clip)
      .add("tau_init", tau_init)
      .add("seed", seed)
      .add("unit_mode", corpus::unit_mode_name(unit_mode))
      .add("checkpoint_out", checkpoint_out);
  if (!include_model) return;
  w.section("model");
  model.write_toml(w);
}

PretrainResult pretrain(const corpus::Corpus& corpus, const PretrainConfig& cfg,
                        const EpochCallback& on_epoch, const ParamStore<float>* init) {
  cfg.validate();
  const corpus::UnitTable table(corpus, cfg.unit_mode);
  PretrainResult out;
  auto& ps = out.params;
  auto init_rng = stream(cfg.seed, kInitStream);
  enc::init_encoders(ps, cfg.model, init_rng);
  add_temperature(ps, cfg.tau_init);
  if (init != nullptr) {
    const auto bad = ps.load_matching(*init);
    if (!bad.empty()) throw CheckpointError("pretrain: incompatible initial tensors: " + join(bad));
  }

  auto emit = [&](const EpochLog& e) {
    out.log.push_back(e);
    if (on_epoch) on_epoch(e);
  };

  {
    auto eval_rng = stream(cfg.seed, kEvalStream);
    const auto batches = epoch_batches(table, cfg.batch_size, eval_rng);
    EpochLog e;
    for (const auto& b : batches) {
      Graph<float> g(false);
      Binder<float> bind(g, static_cast<const ParamStore<float>&>(ps));
      const auto r = run_batch(bind, cfg.model, table, b, nullptr);
      check_finite(r.loss, "pretrain", 0, static_cast<int>(&b - batches.data()));
      e.mean_loss += r.loss;
      e.retrieval_top1 += r.retrieval;
    }
    e.mean_loss /= static_cast<double>(batches.size());
    e.retrieval_top1 /= static_cast<double>(batches.size());
    e.lr = cfg.lr0;
    e.tau = temperature(ps);
    emit(e);
  }

  auto batch_rng = stream(cfg.seed, kBatchStream);
  diff::AdamState<float> adam;
  std::int64_t step = 0;
  std::int64_t total_steps = -1;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto batches = epoch_batches(table, cfg.batch_size, batch_rng);
    if (total_steps < 0) total_steps = static_cast<std::int64_t>(batches.size()) * cfg.epochs;
    EpochLog e;
    e.epoch = epoch;
    for (std::size_t i = 0; i < batches.size(); ++i) {
      const double lr = diff::cosine_lr(step, total_steps, cfg.lr0, cfg.lr_min);
      ps.zero_grad();
      Graph<float> g;
      Binder<float> bind(g, ps);
      diff::Expr<float> loss;
      const auto r = run_batch(bind, cfg.model, table, batches[i], &loss);
      check_finite(r.loss, "pretrain", epoch, static_cast<int>(i));
      g.backward(loss);
      if (cfg.grad_clip > 0) diff::clip_grad_norm(ps, cfg.grad_clip);
      diff::adam_step(ps, adam, lr);
      clamp_temperature(ps);
      e.mean_loss += r.loss;
      e.retrieval_top1 += r.retrieval;
      e.lr = lr;
      ++step;
    }
    e.mean_loss /= static_cast<double>(batches.size());
    e.retrieval_top1 /= static_cast<double>(batches.size());
    e.tau = temperature(ps);
    emit(e);
  }
  return out;
}

void write_epoch_csv(const std::string& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << "epoch,mean_loss,retrieval_top1,lr,tau\n";
  out << std::setprecision(9);
  for (const auto& e : log) {
    out << e.epoch << ',' << e.mean_loss << ',' << e.retrieval_top1 << ',' << e.lr << ',' << e.tau
        << '\n';
  }
}

void MlmConfig::validate() const {
  if (epochs < 0) throw ConfigError("mlm.epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("mlm.batch_size must be >= 1");
  if (!(lr0 > 0) || lr_min < 0 || lr_min > lr0) throw ConfigError("mlm: need 0 <= lr_min <= lr0, lr0 > 0");
  if (!(mask_prob > 0 && mask_prob < 1)) throw ConfigError("mlm.mask_prob must lie in (0, 1)");
  model.validate();
}

MlmConfig MlmConfig::from_flat(const FlatConfig& f) {
  MlmConfig c;
  const auto m = f.subtree("mlm");
  m.require_known({"epochs", "batch_size", "lr0", "lr_min", "mask_prob", "grad_clip", "seed"}, "mlm");
  c.epochs = m.get_int("epochs", c.epochs);
  c.batch_size = m.get_int("batch_size", c.batch_size);
  c.lr0 = m.get_double("lr0", c.lr0);
  c.lr_min = m.get_double("lr_min", c.lr_min);
  c.mask_prob = m.get_double("mask_prob", c.mask_prob);
  c.grad_clip = m.get_double("grad_clip", c.grad_clip);
  c.seed = m.get_u64("seed", c.seed);
  c.model = enc::EncoderConfig::from_flat(f.subtree("model"));
  return c;
}

void MlmConfig::write_toml(TomlWriter& w, bool include_model) const {
  w.section("mlm")
      .add("epochs", epochs)
      .add("batch_size", batch_size)
      .add("lr0", lr0)
      .add("lr_min", lr_min)
      .add("mask_prob", mask_prob)
      .add("grad_clip", grad_clip)
      .add("seed", seed);
  if (!include_model) return;
  w.section("model");
  model.write_toml(w);
}

MlmResult mlm_pretrain(const corpus::Corpus& corpus, const MlmConfig& cfg) {
  cfg.validate();
  if (corpus.empty()) throw DataError("mlm_pretrain: empty corpus");
  const auto& tc = cfg.model.text;
  ParamStore<float> ps;
  auto init_rng = stream(cfg.seed, kInitStream);
  enc::init_text_encoder(ps, tc, cfg.model.joint_dim, init_rng);
  ps.add_glorot("text.mlm.w", tc.dim, tc.vocab_size, init_rng);
  ps.add_const("text.mlm.b", {1, tc.vocab_size}, 0.0f);

  std::vector<std::vector<int>> seqs;
  for (const auto& u : corpus) seqs.push_back(corpus::utterance_subwords(u));
  std::vector<int> order(seqs.size());
  std::iota(order.begin(), order.end(), 0);

  auto rng = stream(cfg.seed, kBatchStream);
  std::bernoulli_distribution masked(cfg.mask_prob);
  const std::int64_t per_epoch = (static_cast<std::int64_t>(seqs.size()) + cfg.batch_size - 1) / cfg.batch_size;
  const std::int64_t total = per_epoch * cfg.epochs;
  diff::AdamState<float> adam;
  std::int64_t step = 0;
  MlmResult out;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      std::swap(order[i], order[i + rng() % (order.size() - i)]);
    }
    double sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
      std::vector<std::vector<int>> batch;
      std::vector<std::pair<int, int>> where;  // (sequence, position)
      std::vector<int> targets;
      for (std::size_t k = b; k < e; ++k) {
        auto s = seqs[order[k]];
        const int seq = static_cast<int>(batch.size());
        int chosen = -1;
        for (int t = 0; t < static_cast<int>(s.size()); ++t) {
          if (masked(rng)) {
            where.emplace_back(seq, t);
            targets.push_back(s[t]);
            chosen = t;
          }
        }
        if (chosen < 0) {  // every sequence contributes at least one target
          const int t = static_cast<int>(rng() % s.size());
          where.emplace_back(seq, t);
          targets.push_back(s[t]);
        }
        batch.push_back(std::move(s));
      }
      for (std::size_t k = 0; k < where.size(); ++k) batch[where[k].first][where[k].second] = corpus::kMaskSubword;

      const double lr = diff::cosine_lr(step, total, cfg.lr0, cfg.lr_min);
      ps.zero_grad();
      Graph<float> g;
      Binder<float> bind(g, ps);
      int L = 0;
      auto h = enc::text_hidden(bind, tc, batch, &L);
      std::vector<int> rows;
      for (const auto& [seq, t] : where) rows.push_back(seq * L + t);
      auto logits = diff::add(diff::matmul(diff::gather_rows(h, std::span<const int>(rows)), bind("text.mlm.w")),
                              bind("text.mlm.b"));
      auto loss = diff::neg(diff::mean_all(diff::pick(diff::log_softmax(logits, 1), std::span<const int>(targets))));
      const double v = loss.value().item();
      check_finite(v, "mlm_pretrain", epoch, static_cast<int>(step));
      g.backward(loss);
      if (cfg.grad_clip > 0) diff::clip_grad_norm(ps, cfg.grad_clip);
      diff::adam_step(ps, adam, lr);
      sum += v;
      ++step;
    }
    out.epoch_loss.push_back(sum / static_cast<double>(per_epoch));
  }
  for (const auto& p : ps) {
    if (p->name.rfind("text.mlm.", 0) == 0) continue;
    out.params.add(p->name, p->value);
  }
  return out;
}

}  // namespace sswp::con
