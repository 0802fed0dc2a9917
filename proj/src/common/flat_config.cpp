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

#include "sswp/common/flat_config.h"

#include <CLI11.hpp>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sswp/common/error.h"

namespace sswp {

namespace {

FlatConfig parse(std::istream& in, const std::string& origin) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  FlatConfig cfg;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    std::string key;
    for (const auto& p : item.parents) key += p + ".";
    key += item.name;
    cfg.set(key, item.inputs);
  }
  return cfg;
}

template <typename N>
N parse_number(const std::string& key, const std::string& text) {
  N v{};
  const char* b = text.data();
  const char* e = b + text.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "' as a number");
  }
  return v;
}

}  // namespace

FlatConfig FlatConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

FlatConfig FlatConfig::from_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in, "<string>");
}

FlatConfig FlatConfig::subtree(const std::string& prefix) const {
  FlatConfig out;
  const std::string p = prefix + ".";
  for (const auto& [key, v] : values_) {
    if (key.size() > p.size() && key.compare(0, p.size(), p) == 0) out.values_[key.substr(p.size())] = v;
  }
  return out;
}

std::vector<std::string> FlatConfig::keys() const {
  std::vector<std::string> k;
  for (const auto& [key, _] : values_) k.push_back(key);
  return k;
}

const std::vector<std::string>* FlatConfig::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  if (it->second.size() != 1) {
    throw ConfigError("config key '" + key + "' expects a single value");
  }
  return &it->second;
}

int FlatConfig::get_int(const std::string& key, int fallback) const {
  const auto* v = find(key);
  return v ? parse_number<int>(key, v->front()) : fallback;
}

std::uint64_t FlatConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto* v = find(key);
  return v ? parse_number<std::uint64_t>(key, v->front()) : fallback;
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
  const auto* v = find(key);
  return v ? parse_number<double>(key, v->front()) : fallback;
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  const std::string& s = v->front();
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + s + "'");
}

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto* v = find(key);
  return v ? v->front() : fallback;
}

std::pair<int, int> FlatConfig::get_range(const std::string& key,
                                          std::pair<int, int> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second.size() != 2) {
    throw ConfigError("config key '" + key + "' expects a two-element array [min, max]");
  }
  return {parse_number<int>(key, it->second[0]), parse_number<int>(key, it->second[1])};
}

std::vector<double> FlatConfig::get_doubles(const std::string& key,
                                            std::vector<double> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const auto& v : it->second) {
    if (!v.empty()) out.push_back(parse_number<double>(key, v));
  }
  return out;
}

std::vector<std::string> FlatConfig::get_strings(const std::string& key,
                                                 std::vector<std::string> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> out;
  for (const auto& v : it->second) {
    if (!v.empty()) out.push_back(v);
  }
  return out;
}

void FlatConfig::set(const std::string& key, std::vector<std::string> values) {
  values_[key] = std::move(values);
}

void FlatConfig::require_known(const std::set<std::string>& known, const std::string& what) const {
  std::string bad;
  for (const auto& [key, _] : values_) {
    if (!known.count(key)) bad += (bad.empty() ? "" : ", ") + key;
  }
  if (!bad.empty()) throw ConfigError(what + ": unknown keys: " + bad);
}

TomlWriter& TomlWriter::add(const std::string& key, int v) {
  out_ += key + " = " + std::to_string(v) + "\n";
  return *this;
}

TomlWriter& TomlWriter::add(const std::string& key, std::uint64_t v) {
  out_ += key + " = " + std::to_string(v) + "\n";
  return *this;
}

TomlWriter& TomlWriter::add(const std::string& key, double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  std::string s = os.str();
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  out_ += key + " = " + s + "\n";
  return *this;
}

TomlWriter& TomlWriter::add(const std::string& key, bool v) {
  out_ += key + " = " + std::string(v ? "true" : "false") + "\n";
  return *this;
}

TomlWriter& TomlWriter::add(const std::string& key, const std::string& v) {
  out_ += key + " = \"" + v + "\"\n";
  return *this;
}

TomlWriter& TomlWriter::add(const std::string& key, std::pair<int, int> v) {
  out_ += key + " = [" + std::to_string(v.first) + ", " + std::to_string(v.second) + "]\n";
  return *this;
}

TomlWriter& TomlWriter::add(const std::string& key, const std::vector<double>& v) {
  std::ostringstream os;
  os << std::setprecision(17) << key << " = [";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]\n";
  out_ += os.str();
  return *this;
}

TomlWriter& TomlWriter::add(const std::string& key, const std::vector<std::string>& v) {
  out_ += key + " = [";
  for (std::size_t i = 0; i < v.size(); ++i) out_ += (i ? ", \"" : "\"") + v[i] + "\"";
  out_ += "]\n";
  return *this;
}

TomlWriter& TomlWriter::section(const std::string& name) {
  if (!out_.empty()) out_ += "\n";
  out_ += "[" + name + "]\n";
  return *this;
}

}  // namespace sswp
