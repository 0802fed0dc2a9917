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

#include "sswp/corpus/io.h"

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "sswp/common/binary_io.h"
#include "sswp/common/error.h"

namespace sswp::corpus {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

void write_features(const diff::Tensor<float>& frames, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write feature file '" + path + "'");
  out.write("SSWF", 4);
  bin::put_uint<std::uint32_t>(out, kFeatureVersion);
  bin::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(frames.rows()));
  bin::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(frames.cols()));
  for (float v : frames.data()) bin::put_f32(out, v);
  if (!out) throw DataError("short write to feature file '" + path + "'");
}

diff::Tensor<float> read_features(const std::string& path, const std::string& utt_id) {
  auto fail = [&](const std::string& msg) {
    throw DataError("utterance '" + utt_id + "': feature file '" + path + "': " + msg);
  };
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open");
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "SSWF") fail("bad magic");
  std::uint32_t version = 0, rows = 0, cols = 0;
  if (!bin::get_uint(in, version) || !bin::get_uint(in, rows) || !bin::get_uint(in, cols)) {
    fail("truncated header");
  }
  if (version != kFeatureVersion) fail("unsupported version " + std::to_string(version));
  if (rows == 0 || cols == 0) fail("empty feature matrix");
  diff::Tensor<float> t = diff::Tensor<float>::matrix(static_cast<int>(rows), static_cast<int>(cols));
  for (auto& v : t.data()) {
    if (!bin::get_f32(in, v)) {
      fail("truncated data (expected " + std::to_string(rows) + "x" + std::to_string(cols) +
           " values)");
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) fail("trailing bytes after data");
  return t;
}

std::string save_corpus(const Corpus& corpus, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "feats");
  const fs::path jsonl = fs::path(dir) / kCorpusFileName;
  std::ofstream out(jsonl, std::ios::binary);
  if (!out) throw DataError("cannot write '" + jsonl.string() + "'");
  for (const auto& utt : corpus) {
    const std::string rel = "feats/" + utt.id + ".sswf";
    json j;
    j["id"] = utt.id;
    json words = json::array();
    for (const auto& w : utt.words) {
      json jw;
      jw["text"] = w.text;
      jw["punct"] = w.has_punct() ? json(w.punct) : json(nullptr);
      jw["subwords"] = w.subword_ids;
      jw["t0"] = w.frame_start;
      jw["t1"] = w.frame_end;
      words.push_back(std::move(jw));
    }
    j["words"] = std::move(words);
    json labels = json::array();
    for (auto l : utt.labels) labels.push_back(to_int(l));
    j["labels"] = std::move(labels);
    j["frames_file"] = rel;
    out << j.dump() << "\n";
    write_features(utt.frames, (fs::path(dir) / rel).string());
  }
  return jsonl.string();
}

Corpus load_corpus(const std::string& path, bool require_labels) {
  fs::path jsonl(path);
  if (fs::is_directory(jsonl)) jsonl /= kCorpusFileName;
  std::ifstream in(jsonl);
  if (!in) throw DataError("cannot open corpus '" + jsonl.string() + "'");
  const fs::path base = jsonl.parent_path();
  Corpus corpus;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = jsonl.string() + ":" + std::to_string(lineno);
    UtteranceRecord utt;
    try {
      const json j = json::parse(line);
      utt.id = j.at("id").get<std::string>();
      for (const auto& jw : j.at("words")) {
        WordToken w;
        w.text = jw.at("text").get<std::string>();
        if (jw.contains("punct") && !jw.at("punct").is_null()) w.punct = jw.at("punct").get<std::string>();
        w.subword_ids = jw.at("subwords").get<std::vector<int>>();
        w.frame_start = jw.at("t0").get<int>();
        w.frame_end = jw.at("t1").get<int>();
        utt.words.push_back(std::move(w));
      }
      if (j.contains("labels")) {
        for (const auto& jl : j.at("labels")) {
          const int v = jl.get<int>();
          if (v < 0 || v > 3) {
            throw DataError(where + ": label " + std::to_string(v) + " out of range 0..3");
          }
          utt.labels.push_back(static_cast<BoundaryLevel>(v));
        }
      }
      const std::string rel = j.at("frames_file").get<std::string>();
      utt.frames = read_features((base / rel).string(), utt.id);
    } catch (const json::exception& e) {
      throw DataError(where + ": malformed record: " + e.what());
    }
    validate(utt, require_labels);
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

}  // namespace sswp::corpus
