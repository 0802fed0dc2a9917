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

#ifndef SSWP_COMMON_FLAT_CONFIG_H_
#define SSWP_COMMON_FLAT_CONFIG_H_

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace sswp {

// Flat key/value view of a TOML file (tables flatten to dotted keys).
// Values keep their textual form; typed getters convert and raise
// ConfigError on malformed input.
class FlatConfig {
 public:
  static FlatConfig from_file(const std::string& path);
  static FlatConfig from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::vector<std::string> keys() const;

  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::pair<int, int> get_range(const std::string& key, std::pair<int, int> fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::string> get_strings(const std::string& key,
                                       std::vector<std::string> fallback) const;

  // Keys under "<prefix>." with the prefix removed.
  FlatConfig subtree(const std::string& prefix) const;

  void set(const std::string& key, std::vector<std::string> values);
  void set(const std::string& key, const std::string& value) { set(key, std::vector{value}); }

  // Throws ConfigError listing keys not in `known`.
  void require_known(const std::set<std::string>& known, const std::string& what) const;

 private:
  const std::vector<std::string>* find(const std::string& key) const;
  std::map<std::string, std::vector<std::string>> values_;
};

// TOML emitter for resolved configs: keeps insertion order.
class TomlWriter {
 public:
  TomlWriter& add(const std::string& key, int v);
  TomlWriter& add(const std::string& key, std::uint64_t v);
  TomlWriter& add(const std::string& key, double v);
  TomlWriter& add(const std::string& key, bool v);
  TomlWriter& add(const std::string& key, const std::string& v);
  TomlWriter& add(const std::string& key, const char* v) { return add(key, std::string(v)); }
  TomlWriter& add(const std::string& key, std::pair<int, int> v);
  TomlWriter& add(const std::string& key, const std::vector<double>& v);
  TomlWriter& add(const std::string& key, const std::vector<std::string>& v);
  // Starts a "[name]" table; later keys belong to it.
  TomlWriter& section(const std::string& name);
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

}  // namespace sswp

#endif  // SSWP_COMMON_FLAT_CONFIG_H_
