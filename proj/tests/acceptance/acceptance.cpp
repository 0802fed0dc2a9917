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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "sswp/annotator/annotator.h"
#include "sswp/cli/gradient_suite.h"
#include "sswp/contrastive/loss.h"
#include "sswp/contrastive/pretrain.h"
#include "sswp/corpus/generator.h"
#include "sswp/corpus/io.h"
#include "sswp/corpus/split.h"
#include "sswp/corpus/units.h"
#include "sswp/diffcore/binder.h"
#include "sswp/encoders/checkpoint.h"
#include "sswp/encoders/encoders.h"
#include "sswp/metrics/ablation.h"
#include "sswp/metrics/metrics.h"

namespace fs = std::filesystem;
using namespace sswp;
using corpus::BoundaryLevel;
using diff::Graph;
using diff::ParamStore;
using diff::Tensor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Relative path -> file contents for every regular file under `dir`.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

// ---- shared state for criteria 3, 4 and 6 --------------------------------

struct Shared {
  corpus::CorpusSplit split;   // 1000 / 100 / 100, default generator
  corpus::Corpus pretrain_set; // prefix of the training split, ~2000 units
  std::optional<con::PretrainResult> pretrained;
  double pretrain_seconds = 0.0;
  std::optional<con::PretrainResult> stage2_init;  // first 250 training sentences
  double stage2_init_seconds = 0.0;
  std::optional<ann::TrainResult> multimodal;
  double multimodal_seconds = 0.0;
};

con::PretrainConfig acceptance_pretrain_config() {
  con::PretrainConfig pc;
  pc.epochs = 30;
  pc.batch_size = 128;
  pc.lr0 = 1e-3;
  pc.seed = 1;
  return pc;
}

ann::AnnotatorConfig acceptance_train_config() {
  ann::AnnotatorConfig ac;
  ac.epochs = 20;
  ac.batch_size = 16;
  ac.lr0 = 1e-3;
  ac.encoder_lr_scale = 0.1;
  ac.seed = 1;
  return ac;
}

Shared& shared() {
  static Shared s = [] {
    Shared s;
    corpus::GeneratorConfig g;  // defaults: 1200 sentences, comma probability 0.7
    s.split = corpus::split_corpus_counts(corpus::generate_corpus(g), 1000, 100, 100, g.seed);
    std::size_t units = 0;
    for (const auto& u : s.split.train) {
      if (units >= 2000) break;
      s.pretrain_set.push_back(u);
      units += u.words.size();
    }
    return s;
  }();
  return s;
}

const con::PretrainResult& pretrained() {
  auto& s = shared();
  if (!s.pretrained) {
    const auto t0 = Clock::now();
    s.pretrained = con::pretrain(s.pretrain_set, acceptance_pretrain_config());
    s.pretrain_seconds = since(t0);
  }
  return *s.pretrained;
}

// Encoders used to initialise the annotator in criteria 4 and 6.
const con::PretrainResult& stage2_init() {
  auto& s = shared();
  if (!s.stage2_init) {
    const corpus::Corpus head(s.split.train.begin(), s.split.train.begin() + 250);
    const auto t0 = Clock::now();
    s.stage2_init = con::pretrain(head, acceptance_pretrain_config());
    s.stage2_init_seconds = since(t0);
  }
  return *s.stage2_init;
}

metrics::MetricsReport test_report(const ann::Annotator& model, const corpus::Corpus& test) {
  std::vector<metrics::LabelSequence> gold;
  for (const auto& u : test) gold.push_back(u.labels);
  return metrics::evaluate(ann::annotate(model, test), gold);
}

const ann::TrainResult& multimodal() {
  auto& s = shared();
  if (!s.multimodal) {
    const auto& pre = stage2_init();
    const auto t0 = Clock::now();
    s.multimodal = ann::train_annotator(s.split.train, s.split.valid, acceptance_train_config(), &pre.params);
    s.multimodal_seconds = since(t0);
  }
  return *s.multimodal;
}

// ---- criteria --------------------------------------------------------------

Outcome gradient_suite(const std::string& cli) {
  const auto t0 = Clock::now();
  const auto results = cli::run_gradient_suite();
  bool all = true;
  double worst = 0;
  std::string worst_name;
  for (const auto& r : results) {
    all = all && r.passed;
    if (r.max_rel_error >= worst) {
      worst = r.max_rel_error;
      worst_name = r.name;
    }
  }
  const double lib_seconds = since(t0);
  std::string detail = std::to_string(results.size()) + " checks, worst " + fmt("%.2e", worst) +
                       " (" + worst_name + ")";
  bool cli_ok = true;
  if (!cli.empty()) {
    const auto t1 = Clock::now();
    const int rc = std::system((cli + " gradcheck --quiet > /dev/null 2>&1").c_str());
    cli_ok = rc == 0;
    detail += ", `gradcheck` exit " + std::to_string(WEXITSTATUS(rc)) + " in " + fmt("%.1fs", since(t1));
  } else {
    detail += ", CLI not given";
  }
  detail += ", library suite " + fmt("%.1fs", lib_seconds);
  return {all && cli_ok && !cli.empty() && lib_seconds < 120.0, detail};
}

double contrastive_value(const Tensor<double>& s, const Tensor<double>& t, double tau) {
  Graph<double> g(false);
  auto theta = g.constant(Tensor<double>::scalar(std::log(tau)));
  return con::contrastive_loss(g.constant(s), g.constant(t), theta).value().item();
}

Outcome contrastive_oracle() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0, 1);
  auto random = [&](int r, int c) {
    Tensor<double> t = Tensor<double>::matrix(r, c);
    for (auto& v : t.data()) v = n(rng);
    return t;
  };
  const double single = contrastive_value(random(1, 6), random(1, 6), 0.07);
  Tensor<double> eye({2, 2}, std::vector<double>{1, 0, 0, 1});
  const double pair = contrastive_value(eye, eye, 1.0);
  const double expect = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));
  bool symmetric = true;
  double perm_err = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int b = 2 + static_cast<int>(rng() % 15);
    const int d = 2 + static_cast<int>(rng() % 10);
    auto s = random(b, d), t = random(b, d);
    const double tau = 0.01 + 0.99 * std::uniform_real_distribution<double>()(rng);
    symmetric = symmetric && contrastive_value(s, t, tau) == contrastive_value(t, s, tau);
    std::vector<int> p(b);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    Tensor<double> sp = Tensor<double>::matrix(b, d), tp = Tensor<double>::matrix(b, d);
    for (int i = 0; i < b; ++i) {
      std::copy(s.row(p[i]).begin(), s.row(p[i]).end(), sp.row(i).begin());
      std::copy(t.row(p[i]).begin(), t.row(p[i]).end(), tp.row(i).begin());
    }
    perm_err = std::max(perm_err, std::abs(contrastive_value(s, t, tau) - contrastive_value(sp, tp, tau)));
  }
  const bool ok = single == 0.0 && std::abs(pair - expect) < 1e-6 && symmetric && perm_err < 1e-6;
  return {ok, "n=1 loss " + fmt("%g", single + 0.0) + ", n=2 identity " + fmt("%.9f", pair) + " vs " +
                  fmt("%.9f", expect) + ", symmetry " + (symmetric ? "exact" : "BROKEN") +
                  " on 50 batches, max permutation change " + fmt("%.1e", perm_err)};
}

Outcome pretraining_learnability() {
  auto& s = shared();
  const auto& r = pretrained();
  const double chance = 1.0 / acceptance_pretrain_config().batch_size;
  double best = 0;
  int best_epoch = 0;
  for (const auto& e : r.log) {
    if (e.epoch > 0 && e.retrieval_top1 > best) {
      best = e.retrieval_top1;
      best_epoch = e.epoch;
    }
  }
  const double init = r.log.front().retrieval_top1;
  const bool ok = best >= 0.90 && init <= 3 * chance && s.pretrain_seconds < 300.0;
  return {ok, std::to_string(corpus::count_words(s.pretrain_set)) + " units: top-1 " + fmt("%.3f", init) +
                  " at init (chance " + fmt("%.4f", chance) + "), best " + fmt("%.3f", best) + " at epoch " +
                  std::to_string(best_epoch) + "/30, " + fmt("%.0fs", s.pretrain_seconds)};
}

Outcome end_to_end_annotation() {
  auto& s = shared();
  const auto& r = multimodal();
  const auto rep = test_report(r.model, s.split.test);
  const double pw = rep.at(BoundaryLevel::PW).f1, pph = rep.at(BoundaryLevel::PPH).f1,
               iph = rep.at(BoundaryLevel::IPH).f1;
  const double seconds = s.stage2_init_seconds + s.multimodal_seconds;
  const bool ok = pph >= 0.85 && pw >= 0.60 && iph >= 0.99 && seconds < 600.0;
  return {ok, "test PW F1 " + fmt("%.3f", pw) + " (>= 0.60), PPH F1 " + fmt("%.3f", pph) +
                  " (>= 0.85), IPH F1 " + fmt("%.3f", iph) + " (>= 0.99); pretrain+train " +
                  fmt("%.0fs", seconds)};
}

Outcome ablation_direction() {
  corpus::GeneratorConfig g;
  g.num_utterances = 400;
  const auto split = corpus::split_corpus_counts(corpus::generate_corpus(g), 200, 100, 100, g.seed);
  metrics::AblationConfig cfg;
  cfg.arms = {"full", "no_contrastive_pretrain", "no_any_pretrain", "no_sswp"};
  cfg.seeds = {1, 2, 3};
  cfg.pretrain = acceptance_pretrain_config();
  // The masked-LM baseline gets the same epoch and learning-rate budget.
  cfg.mlm.epochs = cfg.pretrain.epochs;
  cfg.mlm.lr0 = cfg.pretrain.lr0;
  cfg.train = acceptance_train_config();
  cfg.train.epochs = 30;
  const auto t0 = Clock::now();
  const auto table = metrics::run_ablation(split.train, split, cfg);
  const auto pw = [&](const char* a) { return table.at(a).mean[corpus::to_int(BoundaryLevel::PW)].f1; };
  const auto pph = [&](const char* a) { return table.at(a).mean[corpus::to_int(BoundaryLevel::PPH)].f1; };
  // "At least or about": the MLM arm may trail random init by no more than 0.02.
  constexpr double kAbout = 0.02;
  const bool a = pw("full") >= pw("no_contrastive_pretrain");
  const bool b = pw("no_contrastive_pretrain") >= pw("no_any_pretrain") - kAbout;
  const bool c = pph("full") > pph("no_sswp");
  return {a && b && c, "mean PW F1 full " + fmt("%.3f", pw("full")) + " / no_contrastive " +
                           fmt("%.3f", pw("no_contrastive_pretrain")) + " / no_pretrain " +
                           fmt("%.3f", pw("no_any_pretrain")) + "; PPH F1 full " + fmt("%.3f", pph("full")) +
                           " vs no_sswp " + fmt("%.3f", pph("no_sswp")) + "; " + fmt("%.0fs", since(t0))};
}

Outcome multimodal_advantage() {
  auto& s = shared();
  const auto& mm = multimodal();
  auto cfg = acceptance_train_config();
  cfg.text_only = true;
  const auto text = ann::train_annotator(s.split.train, s.split.valid, cfg, &stage2_init().params);
  const double a = test_report(mm.model, s.split.test).at(BoundaryLevel::PPH).f1;
  const double t = test_report(text.model, s.split.test).at(BoundaryLevel::PPH).f1;
  return {a - t >= 0.05, "comma probability 0.7: PPH F1 multimodal " + fmt("%.3f", a) + " vs text-only " +
                             fmt("%.3f", t) + " (gap " + fmt("%.3f", a - t) + ", need >= 0.05)"};
}

Outcome metrics_oracle() {
  std::mt19937_64 rng(5);
  bool agree = true;
  for (int trial = 0; trial < 100 && agree; ++trial) {
    std::vector<metrics::LabelSequence> gold, pred;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int u = 0; u < n; ++u) {
      const int m = 1 + static_cast<int>(rng() % 12);
      metrics::LabelSequence gs, ps;
      for (int i = 0; i < m; ++i) {
        gs.push_back(corpus::level_from_int(static_cast<int>(rng() % 4)));
        ps.push_back(corpus::level_from_int(static_cast<int>(rng() % 4)));
      }
      gold.push_back(gs);
      pred.push_back(ps);
    }
    const auto rep = metrics::evaluate(pred, gold);
    std::int64_t conf[4][4] = {};
    for (std::size_t u = 0; u < gold.size(); ++u) {
      for (std::size_t i = 0; i < gold[u].size(); ++i) ++conf[corpus::to_int(gold[u][i])][corpus::to_int(pred[u][i])];
    }
    for (int c = 0; c < 4; ++c) {
      std::int64_t tp = conf[c][c], fp = 0, fn = 0;
      for (int o = 0; o < 4; ++o) {
        if (o == c) continue;
        fp += conf[o][c];
        fn += conf[c][o];
      }
      const double p = tp + fp ? double(tp) / double(tp + fp) : 0.0;
      const double r = tp + fn ? double(tp) / double(tp + fn) : 0.0;
      const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
      const auto& s = rep.classes[c];
      agree = agree && s.tp == tp && s.fp == fp && s.fn == fn && s.precision == p && s.recall == r && s.f1 == f;
      for (int o = 0; o < 4; ++o) agree = agree && rep.confusion[c][o] == conf[c][o];
    }
  }
  using L = BoundaryLevel;
  const auto ex = metrics::evaluate({{L::LW, L::PW, L::PW, L::PPH}}, {{L::LW, L::PW, L::LW, L::PPH}});
  const auto& pw = ex.at(L::PW);
  const bool worked = pw.tp == 1 && pw.fp == 1 && pw.fn == 0 && pw.precision == 0.5 && pw.recall == 1.0 &&
                      std::abs(pw.f1 - 2.0 / 3.0) < 1e-12;
  return {agree && worked, std::string("brute-force agreement on 100 random cases: ") + (agree ? "exact" : "MISMATCH") +
                               "; worked example PW prec " + fmt("%.3f", pw.precision) + " rec " +
                               fmt("%.3f", pw.recall) + " f1 " + fmt("%.3f", pw.f1)};
}

Outcome determinism_and_formats() {
  const fs::path root = fs::temp_directory_path() / "sswp_acceptance";
  fs::remove_all(root);
  std::vector<std::string> failures;

  // Corpus files: two same-seed generations, then a load/save round trip.
  corpus::GeneratorConfig g;
  g.num_utterances = 40;
  g.seed = 11;
  const auto c1 = corpus::generate_corpus(g);
  corpus::save_corpus(c1, (root / "c1").string());
  corpus::save_corpus(corpus::generate_corpus(g), (root / "c2").string());
  if (snapshot(root / "c1") != snapshot(root / "c2")) failures.push_back("corpus files differ across runs");
  const auto loaded = corpus::load_corpus((root / "c1").string());
  corpus::save_corpus(loaded, (root / "c3").string());
  if (snapshot(root / "c1") != snapshot(root / "c3")) failures.push_back("corpus round trip not byte-exact");
  for (std::size_t i = 0; i < c1.size() && failures.empty(); ++i) {
    const auto& a = c1[i].frames.data();
    const auto& b = loaded[i].frames.data();
    if (!std::equal(a.begin(), a.end(), b.begin(), b.end())) failures.push_back("frames changed on load");
  }

  // Checkpoints and metric logs from two same-seed pretraining runs.
  con::PretrainConfig pc;
  pc.epochs = 2;
  pc.batch_size = 32;
  pc.lr0 = 1e-3;
  pc.seed = 3;
  pc.model.text.dim = pc.model.audio.dim = pc.model.joint_dim = 16;
  pc.model.text.layers = pc.model.audio.layers = 1;
  std::vector<std::string> ckpts, logs;
  for (int run = 0; run < 2; ++run) {
    const auto r = con::pretrain(c1, pc);
    const auto ck = (root / ("run" + std::to_string(run)) / "encoders.ckpt");
    enc::save_checkpoint(ck.string(), r.params);
    con::write_epoch_csv((ck.parent_path() / "log.csv").string(), r.log);
    ckpts.push_back(slurp(ck));
    logs.push_back(slurp(ck.parent_path() / "log.csv"));
  }
  if (ckpts[0] != ckpts[1]) failures.push_back("checkpoints differ across runs");
  if (logs[0] != logs[1]) failures.push_back("metric logs differ across runs");
  const auto back = enc::load_checkpoint((root / "run0" / "encoders.ckpt").string());
  enc::save_checkpoint((root / "resaved.ckpt").string(), back.params);
  if (slurp(root / "resaved.ckpt") != ckpts[0]) failures.push_back("checkpoint round trip not byte-exact");

  // Encoder properties on 100 random cases each.
  enc::EncoderConfig ec;
  ec.text.dim = ec.audio.dim = ec.joint_dim = 16;
  ec.text.layers = ec.audio.layers = 1;
  ParamStore<float> ps;
  std::mt19937_64 rng(21);
  enc::init_encoders(ps, ec, rng);
  auto text = [&](const enc::TextBatch& b) {
    Graph<float> gr(false);
    diff::Binder<float> bind(gr, ps);
    return enc::encode_text(bind, ec.text, b).value();
  };
  auto audio = [&](const std::vector<enc::FrameSpan>& s) {
    Graph<float> gr(false);
    diff::Binder<float> bind(gr, ps);
    return enc::encode_audio(bind, ec.audio, std::span<const enc::FrameSpan>(s)).value();
  };
  std::normal_distribution<float> n(0, 1);
  float pad_text = 0, pad_audio = 0, isolation = 0;
  for (int t = 0; t < 100; ++t) {
    const int len = 1 + static_cast<int>(rng() % 10);
    std::vector<int> seq(len), longer(len + 1 + rng() % 12);
    for (auto& v : seq) v = 8 + static_cast<int>(rng() % 500);
    for (auto& v : longer) v = 8 + static_cast<int>(rng() % 500);
    const int b = static_cast<int>(rng() % len);
    const int e = b + 1 + static_cast<int>(rng() % (len - b));
    const auto alone = text({{seq}, {{0, b, e}}});
    const auto padded = text({{longer, seq}, {{0, 0, 1}, {1, b, e}}});
    for (int c = 0; c < alone.cols(); ++c) pad_text = std::max(pad_text, std::abs(alone.at(0, c) - padded.at(1, c)));

    const int frames = 2 + static_cast<int>(rng() % 20);
    Tensor<float> f = Tensor<float>::matrix(frames, ec.audio.feat_dim);
    for (auto& v : f.data()) v = n(rng);
    const int fb = static_cast<int>(rng() % (frames - 1));
    const int fe = fb + 1 + static_cast<int>(rng() % (frames - fb));
    Tensor<float> big = Tensor<float>::matrix(40, ec.audio.feat_dim);
    for (auto& v : big.data()) v = n(rng);
    const auto one = audio({{&f, fb, fe}});
    const auto mixed = audio({{&big, 0, 40}, {&f, fb, fe}});
    for (int c = 0; c < one.cols(); ++c) pad_audio = std::max(pad_audio, std::abs(one.at(0, c) - mixed.at(1, c)));
    auto g2 = f;
    for (int r = 0; r < frames; ++r) {
      if (r < fb || r >= fe) {
        for (auto& v : g2.row(r)) v = n(rng) * 5;
      }
    }
    const auto moved = audio({{&g2, fb, fe}});
    for (int c = 0; c < one.cols(); ++c) isolation = std::max(isolation, std::abs(one.at(0, c) - moved.at(0, c)));
  }
  if (pad_text > 1e-5f) failures.push_back("text padding invariance " + fmt("%.2e", pad_text));
  if (pad_audio > 1e-5f) failures.push_back("audio padding invariance " + fmt("%.2e", pad_audio));
  if (isolation != 0.0f) failures.push_back("span isolation " + fmt("%.2e", isolation));
  fs::remove_all(root);

  std::string detail = "corpus/checkpoint/log bytes identical, round trips exact; padding max diff text " +
                       fmt("%.1e", pad_text) + " audio " + fmt("%.1e", pad_audio) + ", span isolation " +
                       fmt("%.1e", isolation) + " (100 cases each)";
  if (!failures.empty()) {
    detail.clear();
    for (const auto& f : failures) detail += (detail.empty() ? "" : "; ") + f;
  }
  return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string cli;
  std::vector<int> only;
  app.add_option("--cli", cli, "Path to the sswp executable");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient suite", [&] { return gradient_suite(cli); }},
      {"contrastive loss oracle", contrastive_oracle},
      {"pretraining learnability", pretraining_learnability},
      {"end-to-end annotation", end_to_end_annotation},
      {"ablation direction", ablation_direction},
      {"multimodal advantage", multimodal_advantage},
      {"metrics oracle", metrics_oracle},
      {"determinism and formats", determinism_and_formats},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
