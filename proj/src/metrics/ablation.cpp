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

#include "sswp/metrics/ablation.h"

#include <iomanip>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "sswp/common/error.h"

namespace sswp::metrics {

using corpus::BoundaryLevel;

namespace {

const std::vector<std::pair<Arm, std::string>>& arm_table() {
  static const std::vector<std::pair<Arm, std::string>> t = {
      {Arm::kFull, "full"},
      {Arm::kNoContrastivePretrain, "no_contrastive_pretrain"},
      {Arm::kNoAnyPretrain, "no_any_pretrain"},
      {Arm::kNoSswp, "no_sswp"},
      {Arm::kNoBilstm, "no_bilstm"},
  };
  return t;
}

std::vector<metrics::LabelSequence> gold_of(const corpus::Corpus& c) {
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

Arm parse_arm(const std::string& name) {
  for (const auto& [a, n] : arm_table()) {
    if (n == name) return a;
  }
  std::string known;
  for (const auto& [a, n] : arm_table()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown ablation arm '" + name + "' (known: " + known + ")");
}

std::string arm_name(Arm arm) {
  for (const auto& [a, n] : arm_table()) {
    if (a == arm) return n;
  }
  return "?";
}

const std::vector<std::string>& all_arm_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [a, n] : arm_table()) v.push_back(n);
    return v;
  }();
  return names;
}

void AblationConfig::validate() const {
  if (arms.empty()) throw ConfigError("ablation.arms must not be empty");
  for (const auto& a : arms) parse_arm(a);
  if (seeds.empty()) throw ConfigError("ablation.seeds must not be empty");
  pretrain.validate();
  mlm.validate();
  train.validate();
}

AblationConfig AblationConfig::from_flat(const FlatConfig& f) {
  AblationConfig c;
  const auto a = f.subtree("ablation");
  a.require_known({"arms", "seeds"}, "ablation");
  c.arms = a.get_strings("arms", c.arms);
  if (a.has("seeds")) {
    c.seeds.clear();
    for (double s : a.get_doubles("seeds", {})) {
      if (s < 0 || s != static_cast<double>(static_cast<std::uint64_t>(s))) {
        throw ConfigError("ablation.seeds must be non-negative integers");
      }
      c.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  c.pretrain = con::PretrainConfig::from_flat(f);
  c.mlm = con::MlmConfig::from_flat(f);
  c.train = ann::AnnotatorConfig::from_flat(f);
  return c;
}

void AblationConfig::write_toml(TomlWriter& w) const {
  std::vector<double> s(seeds.begin(), seeds.end());
  w.section("ablation").add("arms", arms).add("seeds", s);
  pretrain.write_toml(w, false);
  mlm.write_toml(w, false);
  train.write_toml(w);
}

const ArmResult& AblationTable::at(const std::string& arm) const {
  for (const auto& a : arms) {
    if (a.arm == arm) return a;
  }
  throw ConfigError("ablation table has no arm '" + arm + "'");
}

std::string AblationTable::to_table() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << std::left << std::setw(26) << "arm";
  for (const char* c : {"PW", "PPH", "IPH"}) {
    for (const char* m : {"prec", "rec", "f1"}) {
      os << std::right << std::setw(9) << (std::string(c) + "." + m);
    }
  }
  os << std::setw(9) << "macro" << '\n';
  for (const auto& a : arms) {
    os << std::left << std::setw(26) << a.arm;
    for (auto l : {BoundaryLevel::PW, BoundaryLevel::PPH, BoundaryLevel::IPH}) {
      const auto& s = a.mean[corpus::to_int(l)];
      os << std::right << std::setw(9) << s.precision << std::setw(9) << s.recall << std::setw(9)
         << s.f1;
    }
    os << std::setw(9) << a.mean_macro_f1 << '\n';
  }
  if (!arms.empty()) os << "(means over " << arms.front().per_seed.size() << " seeds, test split)\n";
  return os.str();
}

std::string AblationTable::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& a : arms) {
    nlohmann::ordered_json r;
    r["arm"] = a.arm;
    for (int c = 0; c < corpus::kNumLevels; ++c) {
      const auto& s = a.mean[c];
      r["mean"][std::string(corpus::kLevelNames[c])] = {
          {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
    }
    r["mean_macro_f1"] = a.mean_macro_f1;
    auto& seeds = r["per_seed"] = nlohmann::ordered_json::array();
    for (const auto& rep : a.per_seed) seeds.push_back(nlohmann::ordered_json::parse(rep.to_json()));
    j.push_back(std::move(r));
  }
  return j.dump(2);
}

AblationTable run_ablation(const corpus::Corpus& pretrain_corpus, const corpus::CorpusSplit& split,
                           const AblationConfig& cfg, const AblationProgress& progress) {
  cfg.validate();
  std::vector<Arm> arms;
  for (const auto& a : cfg.arms) arms.push_back(parse_arm(a));
  if (split.test.empty()) throw DataError("run_ablation: empty test split");
  const auto gold = gold_of(split.test);
  const auto ids = ids_of(split.test);

  AblationTable table;
  for (Arm a : arms) table.arms.push_back({arm_name(a), {}, {}, 0.0});

  for (std::uint64_t seed : cfg.seeds) {
    // Stage-1 checkpoints are shared between arms of the same seed.
    std::map<std::string, std::unique_ptr<diff::ParamStore<float>>> stage1;
    auto contrastive = [&](corpus::UnitMode mode) -> const diff::ParamStore<float>* {
      const std::string key = "contrastive." + corpus::unit_mode_name(mode);
      auto& slot = stage1[key];
      if (!slot) {
        auto pc = cfg.pretrain;
        pc.seed = seed;
        pc.unit_mode = mode;
        pc.model = cfg.train.model;
        slot = std::make_unique<diff::ParamStore<float>>(con::pretrain(pretrain_corpus, pc).params);
      }
      return slot.get();
    };
    auto mlm = [&]() -> const diff::ParamStore<float>* {
      auto& slot = stage1["mlm"];
      if (!slot) {
        auto mc = cfg.mlm;
        mc.seed = seed;
        mc.model = cfg.train.model;
        slot = std::make_unique<diff::ParamStore<float>>(con::mlm_pretrain(pretrain_corpus, mc).params);
      }
      return slot.get();
    };

    for (std::size_t i = 0; i < arms.size(); ++i) {
      auto tc = cfg.train;
      tc.seed = seed;
      const diff::ParamStore<float>* init = nullptr;
      switch (arms[i]) {
        case Arm::kFull:
          tc.unit_mode = corpus::UnitMode::kSswp;
          init = contrastive(tc.unit_mode);
          break;
        case Arm::kNoContrastivePretrain:
          tc.unit_mode = corpus::UnitMode::kSswp;
          init = mlm();
          break;
        case Arm::kNoAnyPretrain:
          tc.unit_mode = corpus::UnitMode::kSswp;
          break;
        case Arm::kNoSswp:
          tc.unit_mode = corpus::UnitMode::kWordOnly;
          init = contrastive(tc.unit_mode);
          break;
        case Arm::kNoBilstm:
          tc.unit_mode = corpus::UnitMode::kSswp;
          tc.use_bilstm = false;
          init = contrastive(tc.unit_mode);
          break;
      }
      const auto trained = ann::train_annotator(split.train, split.valid, tc, init);
      const auto pred = ann::annotate(trained.model, split.test);
      auto report = evaluate(pred, gold, ids);
      if (progress) progress(table.arms[i].arm, seed, report);
      table.arms[i].per_seed.push_back(std::move(report));
    }
  }

  const double n = static_cast<double>(cfg.seeds.size());
  for (auto& a : table.arms) {
    for (const auto& rep : a.per_seed) {
      for (int c = 0; c < corpus::kNumLevels; ++c) {
        a.mean[c].precision += rep.classes[c].precision / n;
        a.mean[c].recall += rep.classes[c].recall / n;
        a.mean[c].f1 += rep.classes[c].f1 / n;
        a.mean[c].tp += rep.classes[c].tp;
        a.mean[c].fp += rep.classes[c].fp;
        a.mean[c].fn += rep.classes[c].fn;
        a.mean[c].undefined = a.mean[c].undefined || rep.classes[c].undefined;
      }
      a.mean_macro_f1 += rep.macro_f1 / n;
    }
  }
  return table;
}

}  // namespace sswp::metrics
