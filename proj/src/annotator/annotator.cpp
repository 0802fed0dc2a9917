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

#include "sswp/annotator/annotator.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sswp/common/error.h"
#include "sswp/diffcore/optim.h"
#include "sswp/encoders/checkpoint.h"
#include "sswp/encoders/encoders.h"
#include "sswp/encoders/unit_inputs.h"

namespace sswp::ann {

using corpus::BoundaryLevel;
using diff::Binder;
using diff::Expr;
using diff::Graph;
using diff::ParamStore;
using diff::Tensor;

namespace {

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kBatchStream = 1;
constexpr const char* kMetaConfig = "meta.config";

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

bool is_encoder_param(const std::string& name) {
  return name.rfind("text.", 0) == 0 || name.rfind("audio.", 0) == 0;
}

// One LSTM direction over packed sequences; returns hidden states in packed
// order. Finished sequences hold their state through the remaining steps.
template <typename T>
Expr<T> lstm_direction(Binder<T>& bind, const std::string& prefix, Expr<T> e,
                       std::span<const int> lengths, std::span<const int> offsets, int hidden,
                       bool reverse) {
  Graph<T>& g = bind.graph();
  const int B = static_cast<int>(lengths.size());
  const int steps = *std::max_element(lengths.begin(), lengths.end());
  const int H = hidden;
  auto xw = diff::add(diff::matmul(e, bind(prefix + ".wx")), bind(prefix + ".b"));
  auto wh = bind(prefix + ".wh");
  auto h = g.constant(Tensor<T>::matrix(B, H));
  auto c = g.constant(Tensor<T>::matrix(B, H));
  std::vector<Expr<T>> outs;
  outs.reserve(steps);
  std::vector<int> idx(B);
  for (int t = 0; t < steps; ++t) {
    bool full = true;
    Tensor<T> mask = Tensor<T>::matrix(B, H);
    for (int b = 0; b < B; ++b) {
      const int l = lengths[b];
      if (t < l) {
        idx[b] = offsets[b] + (reverse ? l - 1 - t : t);
        std::fill(mask.row(b).begin(), mask.row(b).end(), T(1));
      } else {
        idx[b] = -1;
        full = false;
      }
    }
    auto gates = diff::add(diff::gather_rows(xw, std::span<const int>(idx)), diff::matmul(h, wh));
    auto i = diff::sigmoid(diff::slice_cols(gates, 0, H));
    auto f = diff::sigmoid(diff::slice_cols(gates, H, 2 * H));
    auto gg = diff::tanh(diff::slice_cols(gates, 2 * H, 3 * H));
    auto o = diff::sigmoid(diff::slice_cols(gates, 3 * H, 4 * H));
    auto c_new = diff::add(diff::mul(f, c), diff::mul(i, gg));
    auto h_new = diff::mul(o, diff::tanh(c_new));
    if (full) {
      c = c_new;
      h = h_new;
    } else {
      auto m = g.constant(std::move(mask));
      c = diff::add(c, diff::mul(m, diff::sub(c_new, c)));
      h = diff::add(h, diff::mul(m, diff::sub(h_new, h)));
    }
    outs.push_back(h);
  }
  auto all = diff::concat(outs, 0);  // row t * B + b
  std::vector<int> back;
  for (int b = 0; b < B; ++b) {
    const int l = lengths[b];
    for (int j = 0; j < l; ++j) back.push_back((reverse ? l - 1 - j : j) * B + b);
  }
  return diff::gather_rows(all, std::span<const int>(back));
}

std::vector<int> utterance_refs(const corpus::UnitTable& table, std::span<const int> utterances,
                                std::vector<corpus::UnitRef>& refs) {
  std::vector<int> lengths;
  for (int u : utterances) {
    const int m = static_cast<int>(table.units(u).size());
    for (int k = 0; k < m; ++k) refs.push_back({u, k});
    lengths.push_back(m);
  }
  return lengths;
}

std::vector<int> gold_labels(const corpus::UnitTable& table, std::span<const int> utterances) {
  std::vector<int> out;
  for (int u : utterances) {
    for (const auto& unit : table.units(u)) out.push_back(corpus::to_int(unit.label));
  }
  return out;
}

void check_finite(double loss, int epoch, int step) {
  if (!std::isfinite(loss)) {
    throw NumericError("train_annotator: non-finite loss at epoch " + std::to_string(epoch) +
                       ", step " + std::to_string(step));
  }
}

void init_model(ParamStore<float>& ps, const AnnotatorConfig& cfg) {
  auto rng = stream(cfg.seed, kInitStream);
  enc::init_encoders(ps, cfg.model, rng);
  init_classifier(ps, cfg.model.joint_dim, cfg.hidden, cfg.use_bilstm, rng);
}

struct Prediction {
  std::vector<metrics::LabelSequence> labels;
  double loss = 0.0;  // mean over units, when gold labels are present
};

Prediction predict(const ParamStore<float>& ps, const AnnotatorConfig& cfg,
                   const corpus::UnitTable& table, int batch_size, bool with_loss) {
  Prediction out;
  const int n = table.num_utterances();
  double loss_sum = 0.0;
  std::size_t units = 0;
  for (int b = 0; b < n; b += batch_size) {
    std::vector<int> utts(std::min(batch_size, n - b));
    std::iota(utts.begin(), utts.end(), b);
    Graph<float> g(false);
    Binder<float> bind(g, ps);
    auto logits = annotator_logits(bind, cfg, table, utts);
    if (with_loss) {
      const auto gold = gold_labels(table, utts);
      const double l = ce_loss(logits, std::span<const int>(gold),
                               std::span<const double>(cfg.class_weights))
                           .value()
                           .item();
      loss_sum += l * static_cast<double>(gold.size());
      units += gold.size();
    }
    const auto levels = argmax_levels(logits.value());
    std::size_t pos = 0;
    for (int u : utts) {
      const std::size_t m = table.units(u).size();
      out.labels.emplace_back(levels.begin() + static_cast<std::ptrdiff_t>(pos),
                              levels.begin() + static_cast<std::ptrdiff_t>(pos + m));
      pos += m;
    }
  }
  if (units > 0) out.loss = loss_sum / static_cast<double>(units);
  return out;
}

std::vector<metrics::LabelSequence> gold_sequences(const corpus::Corpus& c) {
  std::vector<metrics::LabelSequence> out;
  for (const auto& u : c) out.push_back(u.labels);
  return out;
}

std::vector<std::string> ids_of(const corpus::Corpus& c) {
  std::vector<std::string> out;
  for (const auto& u : c) out.push_back(u.id);
  return out;
}

}  // namespace

void AnnotatorConfig::validate() const {
  if (epochs < 0) throw ConfigError("train.epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(lr0 > 0) || lr_min < 0 || lr_min > lr0) throw ConfigError("train: need 0 <= lr_min <= lr0, lr0 > 0");
  if (!(encoder_lr_scale > 0)) throw ConfigError("train.encoder_lr_scale must be > 0");
  if (!(grad_clip >= 0)) throw ConfigError("train.grad_clip must be >= 0");
  if (hidden < 1) throw ConfigError("train.hidden must be >= 1");
  if (!class_weights.empty()) {
    if (class_weights.size() != corpus::kNumLevels) {
      throw ConfigError("train.class_weights needs 4 values, got " +
                        std::to_string(class_weights.size()));
    }
    for (double w : class_weights) {
      if (!(w > 0)) throw ConfigError("train.class_weights must be positive");
    }
  }
  model.validate();
}

AnnotatorConfig AnnotatorConfig::from_flat(const FlatConfig& f) {
  AnnotatorConfig c;
  const auto t = f.subtree("train");
  t.require_known({"epochs", "batch_size", "lr0", "lr_min", "encoder_lr_scale", "grad_clip",
                   "hidden", "use_bilstm", "text_only", "freeze_encoders", "class_weights",
                   "unit_mode", "seed", "pretrained", "checkpoint_out"},
                  "train");
  c.epochs = t.get_int("epochs", c.epochs);
  c.batch_size = t.get_int("batch_size", c.batch_size);
  c.lr0 = t.get_double("lr0", c.lr0);
  c.lr_min = t.get_double("lr_min", c.lr_min);
  c.encoder_lr_scale = t.get_double("encoder_lr_scale", c.encoder_lr_scale);
  c.grad_clip = t.get_double("grad_clip", c.grad_clip);
  c.hidden = t.get_int("hidden", c.hidden);
  c.use_bilstm = t.get_bool("use_bilstm", c.use_bilstm);
  c.text_only = t.get_bool("text_only", c.text_only);
  c.freeze_encoders = t.get_bool("freeze_encoders", c.freeze_encoders);
  c.class_weights = t.get_doubles("class_weights", c.class_weights);
  c.unit_mode = corpus::parse_unit_mode(t.get_string("unit_mode", "sswp"));
  c.seed = t.get_u64("seed", c.seed);
  c.pretrained = t.get_string("pretrained", c.pretrained);
  c.checkpoint_out = t.get_string("checkpoint_out", c.checkpoint_out);
  c.model = enc::EncoderConfig::from_flat(f.subtree("model"));
  return c;
}

void AnnotatorConfig::write_toml(TomlWriter& w, bool include_model) const {
  w.section("train")
      .add("epochs", epochs)
      .add("batch_size", batch_size)
      .add("lr0", lr0)
      .add("lr_min", lr_min)
      .add("encoder_lr_scale", encoder_lr_scale)
      .add("grad_clip", grad_clip)
      .add("hidden", hidden)
      .add("use_bilstm", use_bilstm)
      .add("text_only", text_only)
      .add("freeze_encoders", freeze_encoders)
      .add("class_weights", class_weights)
      .add("unit_mode", corpus::unit_mode_name(unit_mode))
      .add("seed", seed)
      .add("pretrained", pretrained)
      .add("checkpoint_out", checkpoint_out);
  if (!include_model) return;
  w.section("model");
  model.write_toml(w);
}

template <typename T>
void init_classifier(ParamStore<T>& ps, int input_dim, int hidden, bool use_bilstm,
                     std::mt19937_64& rng) {
  if (input_dim < 1 || hidden < 1) throw ConfigError("init_classifier: dims must be positive");
  int out_in = input_dim;
  if (use_bilstm) {
    for (const char* dir : {"lstm.fwd", "lstm.bwd"}) {
      const std::string p = dir;
      ps.add_glorot(p + ".wx", input_dim, 4 * hidden, rng);
      ps.add_glorot(p + ".wh", hidden, 4 * hidden, rng);
      Tensor<T> b = Tensor<T>::matrix(1, 4 * hidden);
      for (int k = hidden; k < 2 * hidden; ++k) b[k] = T(1);  // forget gate
      ps.add(p + ".b", std::move(b));
    }
    out_in = 2 * hidden;
  }
  ps.add_glorot("out.w", out_in, corpus::kNumLevels, rng);
  ps.add_const("out.b", {1, corpus::kNumLevels}, T(0));
}

template <typename T>
Expr<T> fuse(Expr<T> t, Expr<T> s) {
  if (t.value().dims() != s.value().dims()) {
    throw ShapeError("fuse: text " + t.value().shape_string() + " vs audio " +
                     s.value().shape_string());
  }
  return diff::add(t, s);
}

template <typename T>
Expr<T> sequence_logits(Binder<T>& bind, Expr<T> e, std::span<const int> lengths, int hidden,
                        bool use_bilstm) {
  if (lengths.empty()) throw ShapeError("sequence_logits: no sequences");
  std::vector<int> offsets;
  int total = 0;
  for (int l : lengths) {
    if (l < 1) throw ShapeError("sequence_logits: empty sequence");
    offsets.push_back(total);
    total += l;
  }
  if (total != e.rows()) {
    throw ShapeError("sequence_logits: lengths cover " + std::to_string(total) + " rows, input has " +
                     std::to_string(e.rows()));
  }
  Expr<T> x = e;
  if (use_bilstm) {
    auto fwd = lstm_direction(bind, "lstm.fwd", e, lengths, offsets, hidden, false);
    auto bwd = lstm_direction(bind, "lstm.bwd", e, lengths, offsets, hidden, true);
    x = diff::concat(std::vector<Expr<T>>{fwd, bwd}, 1);
  }
  return diff::add(diff::matmul(x, bind("out.w")), bind("out.b"));
}

template <typename T>
Tensor<T> classify_sequence(const ParamStore<T>& ps, const Tensor<T>& e, int hidden,
                            bool use_bilstm) {
  Graph<T> g(false);
  Binder<T> bind(g, ps);
  const int m = e.rows();
  auto logits = sequence_logits(bind, g.constant(e), std::span<const int>(&m, 1), hidden, use_bilstm);
  return diff::softmax(logits, 1).value();
}

template <typename T>
Expr<T> ce_loss(Expr<T> logits, std::span<const int> labels, std::span<const double> class_weights) {
  const Tensor<T>& z = logits.value();
  if (z.cols() != corpus::kNumLevels) {
    throw ShapeError("ce_loss: expected 4 columns, got " + z.shape_string());
  }
  if (static_cast<int>(labels.size()) != z.rows()) {
    throw ShapeError("ce_loss: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(z.rows()) + " rows");
  }
  for (int l : labels) {
    if (l < 0 || l >= corpus::kNumLevels) {
      throw DataError("ce_loss: label " + std::to_string(l) + " outside 0..3");
    }
  }
  auto picked = diff::pick(diff::log_softmax(logits, 1), labels);
  if (!class_weights.empty()) {
    if (class_weights.size() != corpus::kNumLevels) throw ConfigError("ce_loss: need 4 class weights");
    Tensor<T> w = Tensor<T>::matrix(static_cast<int>(labels.size()), 1);
    for (std::size_t i = 0; i < labels.size(); ++i) w[i] = static_cast<T>(class_weights[labels[i]]);
    picked = diff::mul(picked, logits.graph->constant(std::move(w)));
  }
  return diff::neg(diff::mean_all(picked));
}

template <typename T>
std::vector<BoundaryLevel> argmax_levels(const Tensor<T>& logits) {
  std::vector<BoundaryLevel> out;
  out.reserve(logits.rows());
  for (int r = 0; r < logits.rows(); ++r) {
    int best = 0;
    for (int c = 1; c < logits.cols(); ++c) {
      if (logits.at(r, c) > logits.at(r, best)) best = c;
    }
    out.push_back(static_cast<BoundaryLevel>(best));
  }
  return out;
}

Expr<float> annotator_logits(Binder<float>& bind, const AnnotatorConfig& cfg,
                             const corpus::UnitTable& table, std::span<const int> utterances) {
  std::vector<corpus::UnitRef> refs;
  const auto lengths = utterance_refs(table, utterances, refs);
  Expr<float> e;
  if (cfg.text_only) {
    // Zero audio embeddings leave the fused sum equal to the text side.
    const auto in = enc::gather_unit_inputs(table, refs);
    e = enc::encode_text(bind, cfg.model.text, in.text);
  } else {
    const auto emb = enc::embed_units(bind, cfg.model, table, refs);
    e = fuse(emb.text, emb.audio);
  }
  return sequence_logits(bind, e, std::span<const int>(lengths), cfg.hidden, cfg.use_bilstm);
}

TrainResult train_annotator(const corpus::Corpus& train, const corpus::Corpus& valid,
                            const AnnotatorConfig& cfg, const ParamStore<float>* pretrained,
                            const TrainCallback& on_epoch) {
  cfg.validate();
  if (train.empty()) throw DataError("train_annotator: empty training split");
  if (valid.empty()) throw DataError("train_annotator: empty validation split");
  for (const auto& u : train) corpus::validate(u, true);
  for (const auto& u : valid) corpus::validate(u, true);

  const corpus::UnitTable train_table(train, cfg.unit_mode);
  const corpus::UnitTable valid_table(valid, cfg.unit_mode);

  ParamStore<float> ps;
  init_model(ps, cfg);
  if (pretrained != nullptr) {
    std::size_t shared = 0;
    for (const auto& p : *pretrained) shared += ps.contains(p->name) ? 1 : 0;
    if (shared == 0) throw CheckpointError("train_annotator: pretrained checkpoint shares no tensors with the model");
    const auto bad = ps.load_matching(*pretrained);
    if (!bad.empty()) throw CheckpointError("train_annotator: incompatible pretrained tensors: " + join(bad));
  }

  // Encoder and head parameters step with separate learning rates.
  std::vector<bool> encoder;
  for (const auto& p : ps) encoder.push_back(is_encoder_param(p->name));
  auto select = [&](bool enc_group) {
    std::size_t i = 0;
    for (auto& p : ps) {
      const bool e = encoder[i++];
      p->trainable = (e == enc_group) && !(e && cfg.freeze_encoders);
    }
  };

  TrainResult out;
  out.model.config = cfg;
  out.model.params = ps.cast<float>();
  double best_f1 = -1.0;
  const auto valid_gold = gold_sequences(valid);
  const auto valid_ids = ids_of(valid);

  const int n = static_cast<int>(train.size());
  const std::int64_t per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::int64_t total = per_epoch * cfg.epochs;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = stream(cfg.seed, kBatchStream);
  diff::AdamState<float> adam_enc, adam_head;
  std::int64_t step = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (int i = 0; i + 1 < n; ++i) std::swap(order[i], order[i + rng() % (n - i)]);
    TrainEpochLog e;
    e.epoch = epoch;
    double loss_sum = 0.0;
    for (std::int64_t b = 0; b < per_epoch; ++b) {
      const int begin = static_cast<int>(b) * cfg.batch_size;
      const std::span<const int> utts(order.data() + begin, std::min(cfg.batch_size, n - begin));
      const double lr = diff::cosine_lr(step, total, cfg.lr0, cfg.lr_min);
      ps.zero_grad();
      Graph<float> g;
      Binder<float> bind(g, ps);
      if (cfg.freeze_encoders) {
        bind.freeze_prefix("text.");
        bind.freeze_prefix("audio.");
      }
      auto logits = annotator_logits(bind, cfg, train_table, utts);
      const auto gold = gold_labels(train_table, utts);
      auto loss = ce_loss(logits, std::span<const int>(gold), std::span<const double>(cfg.class_weights));
      const double v = loss.value().item();
      check_finite(v, epoch, static_cast<int>(b));
      g.backward(loss);
      if (cfg.grad_clip > 0) diff::clip_grad_norm(ps, cfg.grad_clip);
      select(false);
      diff::adam_step(ps, adam_head, lr);
      if (!cfg.freeze_encoders) {
        select(true);
        diff::adam_step(ps, adam_enc, lr * cfg.encoder_lr_scale);
      }
      loss_sum += v;
      e.lr = lr;
      ++step;
    }
    for (auto& p : ps) p->trainable = true;
    e.train_loss = loss_sum / static_cast<double>(per_epoch);

    const auto pred = predict(ps, cfg, valid_table, 32, true);
    const auto report = metrics::evaluate(pred.labels, valid_gold, valid_ids);
    e.valid_loss = pred.loss;
    e.valid_macro_f1 = report.macro_f1;
    e.valid_pw_f1 = report.at(BoundaryLevel::PW).f1;
    e.valid_pph_f1 = report.at(BoundaryLevel::PPH).f1;
    e.valid_iph_f1 = report.at(BoundaryLevel::IPH).f1;
    if (e.valid_macro_f1 > best_f1) {
      best_f1 = e.valid_macro_f1;
      out.best_epoch = epoch;
      out.model.params = ps.cast<float>();
    }
    out.log.push_back(e);
    if (on_epoch) on_epoch(e);
  }
  return out;
}

std::vector<metrics::LabelSequence> annotate(const Annotator& model, const corpus::Corpus& corpus,
                                             int batch_size) {
  if (batch_size < 1) throw ConfigError("annotate: batch_size must be >= 1");
  for (const auto& u : corpus) corpus::validate(u, false);
  if (corpus.empty()) return {};
  const corpus::UnitTable table(corpus, model.config.unit_mode);
  return predict(model.params, model.config, table, batch_size, false).labels;
}

void write_train_csv(const std::string& path, const std::vector<TrainEpochLog>& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << "epoch,train_loss,valid_loss,valid_macro_f1,pw_f1,pph_f1,iph_f1,lr\n";
  out << std::setprecision(9);
  for (const auto& e : log) {
    out << e.epoch << ',' << e.train_loss << ',' << e.valid_loss << ',' << e.valid_macro_f1 << ','
        << e.valid_pw_f1 << ',' << e.valid_pph_f1 << ',' << e.valid_iph_f1 << ',' << e.lr << '\n';
  }
}

void save_annotator(const std::string& path, const Annotator& model) {
  TomlWriter w;
  model.config.write_toml(w);
  enc::save_checkpoint(path, model.params, {{kMetaConfig, w.str()}});
}

Annotator load_annotator(const std::string& path) {
  auto ck = enc::load_checkpoint(path);
  const auto it = ck.blobs.find(kMetaConfig);
  if (it == ck.blobs.end()) throw CheckpointError(path + ": no " + std::string(kMetaConfig) + " blob; not an annotator checkpoint");
  Annotator a;
  try {
    a.config = AnnotatorConfig::from_flat(FlatConfig::from_string(it->second));
    a.config.validate();
  } catch (const ConfigError& e) {
    throw CheckpointError(path + ": bad embedded config: " + e.what());
  }
  ParamStore<float> expected;
  init_model(expected, a.config);
  std::vector<std::string> bad;
  for (const auto& p : expected) {
    if (!ck.params.contains(p->name)) {
      bad.push_back(p->name + " (missing)");
    } else if (ck.params.get(p->name).value.dims() != p->value.dims()) {
      bad.push_back(p->name + " " + ck.params.get(p->name).value.shape_string() + " vs " +
                    p->value.shape_string());
    }
  }
  for (const auto& p : ck.params) {
    if (!expected.contains(p->name)) bad.push_back(p->name + " (unexpected)");
  }
  if (!bad.empty()) throw CheckpointError(path + ": tensors do not match the embedded config: " + join(bad));
  a.params = std::move(ck.params);
  return a;
}

void write_annotations_jsonl(const std::string& path, const corpus::Corpus& corpus,
                             const std::vector<metrics::LabelSequence>& labels) {
  if (corpus.size() != labels.size()) {
    throw DataError("write_annotations_jsonl: " + std::to_string(labels.size()) +
                    " label sequences for " + std::to_string(corpus.size()) + " utterances");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    nlohmann::ordered_json j;
    j["id"] = corpus[i].id;
    auto& arr = j["labels"] = nlohmann::ordered_json::array();
    for (auto l : labels[i]) arr.push_back(corpus::to_int(l));
    out << j.dump() << '\n';
  }
}

std::vector<metrics::LabelSequence> read_annotations_jsonl(const std::string& path,
                                                           std::vector<std::string>* ids) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::vector<metrics::LabelSequence> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    try {
      const auto j = nlohmann::json::parse(line);
      metrics::LabelSequence seq;
      for (const auto& v : j.at("labels")) seq.push_back(corpus::level_from_int(v.get<int>()));
      if (ids != nullptr) ids->push_back(j.at("id").get<std::string>());
      out.push_back(std::move(seq));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return out;
}

#define SSWP_ANN_INSTANTIATE(T)                                                                  \
  template void init_classifier(ParamStore<T>&, int, int, bool, std::mt19937_64&);               \
  template Expr<T> fuse(Expr<T>, Expr<T>);                                                       \
  template Expr<T> sequence_logits(Binder<T>&, Expr<T>, std::span<const int>, int, bool);        \
  template Tensor<T> classify_sequence(const ParamStore<T>&, const Tensor<T>&, int, bool);       \
  template Expr<T> ce_loss(Expr<T>, std::span<const int>, std::span<const double>);              \
  template std::vector<BoundaryLevel> argmax_levels(const Tensor<T>&);

SSWP_ANN_INSTANTIATE(float)
SSWP_ANN_INSTANTIATE(double)

}  // namespace sswp::ann
