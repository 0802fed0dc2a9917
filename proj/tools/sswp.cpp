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

// sswp: data generation, contrastive pretraining, annotator training,
// annotation, evaluation, ablations and gradient self-checks.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "sswp/annotator/annotator.h"
#include "sswp/cli/gradient_suite.h"
#include "sswp/common/error.h"
#include "sswp/contrastive/pretrain.h"
#include "sswp/corpus/generator.h"
#include "sswp/corpus/io.h"
#include "sswp/corpus/split.h"
#include "sswp/diffcore/graph.h"
#include "sswp/encoders/checkpoint.h"
#include "sswp/metrics/ablation.h"
#include "sswp/metrics/metrics.h"

namespace fs = std::filesystem;
using namespace sswp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

constexpr char kResolvedConfig[] = "config.resolved.toml";

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c, bool out_required) {
  cmd->add_option("--config", c.config, "TOML config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Seed (overrides the config)");
  auto* out = cmd->add_option("--out", c.out, "Output directory");
  if (out_required) out->required();
  cmd->add_flag("--quiet", c.quiet, "Only log warnings and errors");
}

FlatConfig load_config(const Common& c) {
  return c.config.empty() ? FlatConfig::from_string("") : FlatConfig::from_file(c.config);
}

void set_value(FlatConfig& f, const std::string& key, const std::string& v) { f.set(key, v); }

template <typename T>
void set_if(FlatConfig& f, const std::string& key, const std::optional<T>& v) {
  if (!v) return;
  std::ostringstream os;
  os << std::setprecision(17) << *v;
  f.set(key, os.str());
}

void set_flag(FlatConfig& f, const std::string& key, bool on) {
  if (on) f.set(key, "true");
}

fs::path prepare_out(const std::string& out) {
  fs::path p(out);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write " + path.string());
  os << text;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- gen-data --------------------------------------------------------------

struct GenArgs {
  Common common;
  std::optional<int> num_utterances;
  std::optional<double> comma_prob;
  std::optional<double> noise_sigma;
  std::vector<int> split;
};

int cmd_gen_data(const GenArgs& a) {
  auto flat = load_config(a.common);
  auto gen = flat.subtree("generator");
  set_if(gen, "seed", a.common.seed);
  set_if(gen, "num_utterances", a.num_utterances);
  set_if(gen, "comma_prob", a.comma_prob);
  set_if(gen, "noise_sigma", a.noise_sigma);
  const auto cfg = corpus::GeneratorConfig::from_flat(gen);
  cfg.validate();

  std::vector<int> counts = a.split;
  if (counts.empty()) {
    const auto sp = flat.subtree("split");
    sp.require_known({"train", "valid", "test"}, "split");
    const int n = cfg.num_utterances;
    const int held = static_cast<int>(std::lround(n / 12.0));
    counts = {sp.get_int("train", n - 2 * held), sp.get_int("valid", held), sp.get_int("test", held)};
  }
  if (counts.size() != 3) throw ConfigError("--split takes three counts: TRAIN,VALID,TEST");

  const auto out = prepare_out(a.common.out);
  const auto t0 = std::chrono::steady_clock::now();
  const auto corpus = corpus::generate_corpus(cfg);
  const auto split = corpus::split_corpus_counts(corpus, counts[0], counts[1], counts[2], cfg.seed);
  corpus::save_corpus(split.train, (out / "train").string());
  corpus::save_corpus(split.valid, (out / "valid").string());
  corpus::save_corpus(split.test, (out / "test").string());

  TomlWriter w;
  w.section("split").add("train", counts[0]).add("valid", counts[1]).add("test", counts[2]);
  write_text(out / kResolvedConfig, "[generator]\n" + cfg.to_toml() + "\n" + w.str());
  spdlog::info("generated {} utterances ({} words): train {}, valid {}, test {} in {:.1f}s",
               corpus.size(), corpus::count_words(corpus), split.train.size(), split.valid.size(),
               split.test.size(), seconds_since(t0));
  return kExitOk;
}

// ---- pretrain --------------------------------------------------------------

struct PretrainArgs {
  Common common;
  std::string data;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> lr0;
  std::string unit_mode;
  std::string init;
};

int cmd_pretrain(const PretrainArgs& a) {
  auto flat = load_config(a.common);
  set_if(flat, "pretrain.seed", a.common.seed);
  set_if(flat, "pretrain.epochs", a.epochs);
  set_if(flat, "pretrain.batch_size", a.batch_size);
  set_if(flat, "pretrain.lr0", a.lr0);
  if (!a.unit_mode.empty()) set_value(flat, "pretrain.unit_mode", a.unit_mode);
  const auto out = prepare_out(a.common.out);
  const auto ckpt = (out / "encoders.ckpt").string();
  set_value(flat, "pretrain.checkpoint_out", ckpt);
  const auto cfg = con::PretrainConfig::from_flat(flat);
  cfg.validate();
  TomlWriter w;
  cfg.write_toml(w);
  write_text(out / kResolvedConfig, w.str());

  const auto data = corpus::load_corpus(a.data, false);
  std::optional<enc::Checkpoint> init;
  if (!a.init.empty()) init = enc::load_checkpoint(a.init);
  spdlog::info("pretraining on {} utterances ({} words), {} epochs", data.size(),
               corpus::count_words(data), cfg.epochs);
  const auto t0 = std::chrono::steady_clock::now();
  auto result = con::pretrain(data, cfg, [&](const con::EpochLog& e) {
    spdlog::info("epoch {:3d}  loss {:.4f}  top1 {:.3f}  lr {:.2e}  tau {:.4f}  ({:.0f}s)", e.epoch,
                 e.mean_loss, e.retrieval_top1, e.lr, e.tau, seconds_since(t0));
  }, init ? &init->params : nullptr);
  enc::save_checkpoint(ckpt, result.params);
  con::write_epoch_csv((out / "pretrain_log.csv").string(), result.log);
  spdlog::info("wrote {}", ckpt);
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string train;
  std::string valid;
  std::string pretrained;
  std::optional<int> epochs;
  std::optional<double> lr0;
  bool text_only = false;
  bool freeze = false;
  bool no_bilstm = false;
};

int cmd_train(const TrainArgs& a) {
  auto flat = load_config(a.common);
  set_if(flat, "train.seed", a.common.seed);
  set_if(flat, "train.epochs", a.epochs);
  set_if(flat, "train.lr0", a.lr0);
  set_flag(flat, "train.text_only", a.text_only);
  set_flag(flat, "train.freeze_encoders", a.freeze);
  if (a.no_bilstm) set_value(flat, "train.use_bilstm", "false");
  if (!a.pretrained.empty()) set_value(flat, "train.pretrained", a.pretrained);
  const auto out = prepare_out(a.common.out);
  const auto ckpt = (out / "annotator.ckpt").string();
  set_value(flat, "train.checkpoint_out", ckpt);
  const auto cfg = ann::AnnotatorConfig::from_flat(flat);
  cfg.validate();
  TomlWriter w;
  cfg.write_toml(w);
  write_text(out / kResolvedConfig, w.str());

  const auto train = corpus::load_corpus(a.train, true);
  const auto valid = corpus::load_corpus(a.valid, true);
  std::optional<enc::Checkpoint> pre;
  if (!cfg.pretrained.empty()) pre = enc::load_checkpoint(cfg.pretrained);
  spdlog::info("training on {} utterances, validating on {}, init {}", train.size(), valid.size(),
               cfg.pretrained.empty() ? "random" : cfg.pretrained);
  const auto t0 = std::chrono::steady_clock::now();
  auto result = ann::train_annotator(train, valid, cfg, pre ? &pre->params : nullptr,
                                     [&](const ann::TrainEpochLog& e) {
    spdlog::info("epoch {:3d}  train {:.4f}  valid {:.4f}  macro-F1 {:.3f} (PW {:.3f} PPH {:.3f} "
                 "IPH {:.3f})  ({:.0f}s)",
                 e.epoch, e.train_loss, e.valid_loss, e.valid_macro_f1, e.valid_pw_f1,
                 e.valid_pph_f1, e.valid_iph_f1, seconds_since(t0));
  });
  ann::save_annotator(ckpt, result.model);
  ann::write_train_csv((out / "train_log.csv").string(), result.log);
  spdlog::info("best epoch {}; wrote {}", result.best_epoch, ckpt);
  return kExitOk;
}

// ---- annotate --------------------------------------------------------------

struct AnnotateArgs {
  Common common;
  std::string model;
  std::string data;
  int batch_size = 32;
};

int cmd_annotate(const AnnotateArgs& a) {
  const auto out = prepare_out(a.common.out);
  const auto model = ann::load_annotator(a.model);
  const auto data = corpus::load_corpus(a.data, false);
  TomlWriter w;
  model.config.write_toml(w);
  write_text(out / kResolvedConfig, w.str());
  const auto labels = ann::annotate(model, data, a.batch_size);
  const auto path = out / "annotations.jsonl";
  ann::write_annotations_jsonl(path.string(), data, labels);
  spdlog::info("annotated {} utterances -> {}", data.size(), path.string());
  return kExitOk;
}

// ---- eval ------------------------------------------------------------------

// Gold labels come from a corpus (records with "words") or an annotation file.
std::map<std::string, metrics::LabelSequence> read_labels(const std::string& path) {
  std::string file = path;
  if (fs::is_directory(path)) file = (fs::path(path) / corpus::kCorpusFileName).string();
  std::ifstream in(file);
  if (!in) throw DataError("cannot read " + file);
  std::string line;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  bool is_corpus = false;
  try {
    is_corpus = nlohmann::json::parse(line).contains("words");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(file + ":1: " + e.what());
  }
  std::map<std::string, metrics::LabelSequence> out;
  auto put = [&](const std::string& id, metrics::LabelSequence seq) {
    if (!out.emplace(id, std::move(seq)).second) throw DataError(file + ": duplicate id '" + id + "'");
  };
  if (is_corpus) {
    for (auto& u : corpus::load_corpus(file, true)) put(u.id, std::move(u.labels));
  } else {
    std::vector<std::string> ids;
    auto seqs = ann::read_annotations_jsonl(file, &ids);
    for (std::size_t i = 0; i < ids.size(); ++i) put(ids[i], std::move(seqs[i]));
  }
  return out;
}

struct EvalArgs {
  Common common;
  std::string pred;
  std::string gold;
};

int cmd_eval(const EvalArgs& a) {
  const auto pred = read_labels(a.pred);
  const auto gold = read_labels(a.gold);
  std::vector<metrics::LabelSequence> p, g;
  std::vector<std::string> ids;
  for (const auto& [id, seq] : gold) {
    auto it = pred.find(id);
    if (it == pred.end()) throw DataError("no prediction for utterance '" + id + "'");
    ids.push_back(id);
    g.push_back(seq);
    p.push_back(it->second);
  }
  if (pred.size() != gold.size()) {
    for (const auto& [id, seq] : pred) {
      if (!gold.count(id)) throw DataError("prediction for unknown utterance '" + id + "'");
    }
  }
  const auto report = metrics::evaluate(p, g, ids);
  if (!a.common.quiet) std::cout << report.to_table();
  if (!a.common.out.empty()) {
    const auto out = prepare_out(a.common.out);
    write_text(out / "report.txt", report.to_table());
    write_text(out / "report.json", report.to_json() + "\n");
    std::ostringstream csv;
    csv << std::setprecision(9) << "class,tp,fp,fn,precision,recall,f1,undefined\n";
    for (int c = 0; c < corpus::kNumLevels; ++c) {
      const auto& s = report.classes[c];
      csv << corpus::kLevelNames[c] << ',' << s.tp << ',' << s.fp << ',' << s.fn << ','
          << s.precision << ',' << s.recall << ',' << s.f1 << ',' << (s.undefined ? 1 : 0) << '\n';
    }
    write_text(out / "metrics.csv", csv.str());
    TomlWriter w;
    w.section("eval").add("pred", a.pred).add("gold", a.gold);
    write_text(out / kResolvedConfig, w.str());
  }
  return kExitOk;
}

// ---- ablate ----------------------------------------------------------------

struct AblateArgs {
  Common common;
  std::string train;
  std::string valid;
  std::string test;
  std::string pretrain_data;
  std::vector<std::string> arms;
};

int cmd_ablate(const AblateArgs& a) {
  auto flat = load_config(a.common);
  if (a.common.seed) set_value(flat, "ablation.seeds", std::to_string(*a.common.seed));
  if (!a.arms.empty()) flat.set("ablation.arms", a.arms);
  const auto cfg = metrics::AblationConfig::from_flat(flat);
  cfg.validate();
  const auto out = prepare_out(a.common.out);
  TomlWriter w;
  cfg.write_toml(w);
  write_text(out / kResolvedConfig, w.str());

  corpus::CorpusSplit split{corpus::load_corpus(a.train, true), corpus::load_corpus(a.valid, true),
                            corpus::load_corpus(a.test, true)};
  const auto pool = a.pretrain_data.empty() ? split.train : corpus::load_corpus(a.pretrain_data, false);
  const auto t0 = std::chrono::steady_clock::now();
  const auto table = metrics::run_ablation(pool, split, cfg, [&](const std::string& arm, std::uint64_t seed,
                                                                  const metrics::MetricsReport& r) {
    spdlog::info("{:<24} seed {}  PW F1 {:.3f}  PPH F1 {:.3f}  IPH F1 {:.3f}  ({:.0f}s)", arm, seed,
                 r.at(corpus::BoundaryLevel::PW).f1, r.at(corpus::BoundaryLevel::PPH).f1,
                 r.at(corpus::BoundaryLevel::IPH).f1, seconds_since(t0));
  });
  if (!a.common.quiet) std::cout << table.to_table();
  write_text(out / "ablation.txt", table.to_table());
  write_text(out / "ablation.json", table.to_json() + "\n");
  std::ostringstream csv;
  csv << std::setprecision(9) << "arm,seed,pw_f1,pph_f1,iph_f1,macro_f1\n";
  for (const auto& arm : table.arms) {
    for (std::size_t i = 0; i < arm.per_seed.size(); ++i) {
      const auto& r = arm.per_seed[i];
      csv << arm.arm << ',' << cfg.seeds[i] << ',' << r.at(corpus::BoundaryLevel::PW).f1 << ','
          << r.at(corpus::BoundaryLevel::PPH).f1 << ',' << r.at(corpus::BoundaryLevel::IPH).f1 << ','
          << r.macro_f1 << '\n';
    }
  }
  write_text(out / "ablation.csv", csv.str());
  return kExitOk;
}

// ---- gradcheck -------------------------------------------------------------

struct GradArgs {
  Common common;
  int trials = 3;
  std::string fault;
};

int cmd_gradcheck(const GradArgs& a) {
  cli::SuiteOptions opts;
  opts.trials_per_op = a.trials;
  if (a.common.seed) opts.seed = *a.common.seed;
  diff::testing::set_backward_fault(a.fault);
  const auto t0 = std::chrono::steady_clock::now();
  bool all = true;
  std::ostringstream report;
  report << std::left << std::setw(24) << "check" << std::right << std::setw(14) << "max_rel_err"
         << std::setw(9) << "coords" << "  result\n";
  const auto results = cli::run_gradient_suite(opts, [&](const diff::GradCheckResult& r) {
    std::ostringstream line;
    line << std::left << std::setw(24) << r.name << std::right << std::scientific
         << std::setprecision(3) << std::setw(14) << r.max_rel_error << std::setw(9)
         << r.coords_checked << "  " << (r.passed ? "PASS" : "FAIL");
    if (!r.passed) line << "  (worst: " << r.worst_param << ")";
    report << line.str() << '\n';
    if (!a.common.quiet || !r.passed) std::cout << line.str() << std::endl;
    all = all && r.passed;
  });
  diff::testing::set_backward_fault("");
  std::ostringstream summary;
  summary << results.size() << " checks, " << (all ? "all passed" : "FAILURES") << " (tolerance "
          << opts.tolerance << ", step " << opts.step << ", " << std::fixed << std::setprecision(1)
          << seconds_since(t0) << "s)";
  std::cout << summary.str() << std::endl;
  if (!a.common.out.empty()) {
    const auto out = prepare_out(a.common.out);
    write_text(out / "gradcheck.txt", report.str() + summary.str() + "\n");
  }
  return all ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SSWP prosodic boundary annotation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sswp 0.1.0");

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen-data", "Generate a synthetic aligned corpus with train/valid/test splits");
  add_common(c_gen, gen.common, true);
  c_gen->add_option("--num-utterances", gen.num_utterances, "Number of sentences");
  c_gen->add_option("--comma-prob", gen.comma_prob, "Probability of a comma at phrase ends");
  c_gen->add_option("--noise-sigma", gen.noise_sigma, "Frame noise standard deviation");
  c_gen->add_option("--split", gen.split, "Split sizes TRAIN,VALID,TEST")->delimiter(',')->expected(3);

  PretrainArgs pre;
  auto* c_pre = app.add_subcommand("pretrain", "Contrastive text-speech pretraining of both encoders");
  add_common(c_pre, pre.common, true);
  c_pre->add_option("--data", pre.data, "Corpus directory or .jsonl")->required();
  c_pre->add_option("--epochs", pre.epochs);
  c_pre->add_option("--batch-size", pre.batch_size);
  c_pre->add_option("--lr0", pre.lr0);
  c_pre->add_option("--unit-mode", pre.unit_mode, "sswp or word");
  c_pre->add_option("--init", pre.init, "Checkpoint to start from")->check(CLI::ExistingFile);

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train the boundary annotator");
  add_common(c_tr, tr.common, true);
  c_tr->add_option("--train", tr.train, "Training corpus")->required();
  c_tr->add_option("--valid", tr.valid, "Validation corpus")->required();
  c_tr->add_option("--pretrained", tr.pretrained, "Encoder checkpoint from `pretrain`")->check(CLI::ExistingFile);
  c_tr->add_option("--epochs", tr.epochs);
  c_tr->add_option("--lr0", tr.lr0);
  c_tr->add_flag("--text-only", tr.text_only, "Ignore audio");
  c_tr->add_flag("--freeze-encoders", tr.freeze, "Train the classifier only");
  c_tr->add_flag("--no-bilstm", tr.no_bilstm, "Linear classifier over unit embeddings");

  AnnotateArgs an;
  auto* c_an = app.add_subcommand("annotate", "Predict boundary labels");
  add_common(c_an, an.common, true);
  c_an->add_option("--model", an.model, "Annotator checkpoint")->required()->check(CLI::ExistingFile);
  c_an->add_option("--data", an.data, "Corpus directory or .jsonl (labels optional)")->required();
  c_an->add_option("--batch-size", an.batch_size)->check(CLI::PositiveNumber);

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "Score predicted labels against gold labels");
  add_common(c_ev, ev.common, false);
  c_ev->add_option("--pred", ev.pred, "Annotations .jsonl")->required();
  c_ev->add_option("--gold", ev.gold, "Labeled corpus or annotations .jsonl")->required();

  AblateArgs ab;
  auto* c_ab = app.add_subcommand("ablate", "Run ablation arms and compare them");
  add_common(c_ab, ab.common, true);
  c_ab->add_option("--train", ab.train)->required();
  c_ab->add_option("--valid", ab.valid)->required();
  c_ab->add_option("--test", ab.test)->required();
  c_ab->add_option("--pretrain-data", ab.pretrain_data, "Unlabeled pretraining corpus (default: --train)");
  c_ab->add_option("--arms", ab.arms, "Comma-separated arms")->delimiter(',');

  GradArgs gc;
  auto* c_gc = app.add_subcommand("gradcheck", "Finite-difference check of every gradient");
  add_common(c_gc, gc.common, false);
  c_gc->add_option("--trials", gc.trials, "Random points per op")->check(CLI::PositiveNumber);
  c_gc->add_option("--inject-fault", gc.fault, "Corrupt the backward rule of OP (negative control)")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  auto logger = spdlog::stderr_color_mt("sswp");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] %v");
  for (const Common* c : {&gen.common, &pre.common, &tr.common, &an.common, &ev.common, &ab.common, &gc.common}) {
    if (c->quiet) spdlog::set_level(spdlog::level::warn);
  }

  try {
    if (*c_gen) return cmd_gen_data(gen);
    if (*c_pre) return cmd_pretrain(pre);
    if (*c_tr) return cmd_train(tr);
    if (*c_an) return cmd_annotate(an);
    if (*c_ev) return cmd_eval(ev);
    if (*c_ab) return cmd_ablate(ab);
    if (*c_gc) return cmd_gradcheck(gc);
  } catch (const ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return kExitUsage;
  } catch (const NumericError& e) {
    spdlog::error("numeric: {}", e.what());
    return kExitNumeric;
  } catch (const DataError& e) {
    spdlog::error("data: {}", e.what());
    return kExitData;
  } catch (const CheckpointError& e) {
    spdlog::error("checkpoint: {}", e.what());
    return kExitData;
  } catch (const ShapeError& e) {
    spdlog::error("shape: {}", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailed;
  }
  return kExitUsage;
}
