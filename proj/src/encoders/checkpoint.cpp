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

#include "sswp/encoders/checkpoint.h"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>

#include "sswp/common/binary_io.h"
#include "sswp/common/error.h"

namespace sswp::enc {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'W', 'P'};
constexpr std::uint8_t kF32 = 0, kF64 = 1, kBlob = 2;

void put_name(std::ostream& out, const std::string& name) {
  if (name.empty() || name.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw CheckpointError("checkpoint: invalid tensor name '" + name + "'");
  }
  bin::put_uint<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
}

}  // namespace

void save_checkpoint(const std::string& path, const diff::ParamStore<float>& params,
                     const std::map<std::string, std::string>& blobs) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("checkpoint: cannot write " + path);
  out.write(kMagic, 4);
  bin::put_uint<std::uint32_t>(out, kCheckpointVersion);
  bin::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(params.size() + blobs.size()));
  for (const auto& p : params) {
    put_name(out, p->name);
    bin::put_uint<std::uint8_t>(out, kF32);
    const auto& dims = p->value.dims();
    bin::put_uint<std::uint8_t>(out, static_cast<std::uint8_t>(dims.size()));
    for (int d : dims) bin::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (float v : p->value.data()) bin::put_f32(out, v);
  }
  for (const auto& [name, text] : blobs) {
    if (params.contains(name)) throw CheckpointError("checkpoint: blob '" + name + "' shadows a tensor");
    put_name(out, name);
    bin::put_uint<std::uint8_t>(out, kBlob);
    bin::put_uint<std::uint8_t>(out, 1);
    bin::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
  }
  if (!out) throw CheckpointError("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path);
  auto fail = [&](const std::string& what) {
    return CheckpointError("checkpoint " + path + ": " + what);
  };
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw fail("bad magic");
  }
  std::uint32_t version = 0, count = 0;
  if (!bin::get_uint(in, version) || !bin::get_uint(in, count)) throw fail("truncated header");
  if (version != kCheckpointVersion) throw fail("unsupported version " + std::to_string(version));

  Checkpoint ck;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint16_t len = 0;
    if (!bin::get_uint(in, len)) throw fail("truncated entry " + std::to_string(i));
    std::string name(len, '\0');
    std::uint8_t dtype = 0, rank = 0;
    if (!in.read(name.data(), len) || !bin::get_uint(in, dtype) || !bin::get_uint(in, rank)) {
      throw fail("truncated entry " + std::to_string(i));
    }
    if (rank == 0) throw fail("tensor '" + name + "' has rank 0");
    std::vector<int> dims;
    std::size_t n = 1;
    for (int r = 0; r < rank; ++r) {
      std::uint32_t d = 0;
      if (!bin::get_uint(in, d)) throw fail("truncated dims for '" + name + "'");
      if (d == 0 || d > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
        throw fail("invalid dim for '" + name + "'");
      }
      dims.push_back(static_cast<int>(d));
      n *= d;
    }
    if (ck.params.contains(name) || ck.blobs.count(name)) throw fail("duplicate entry '" + name + "'");
    if (dtype == kBlob) {
      if (rank != 1) throw fail("blob '" + name + "' must have rank 1");
      std::string text(n, '\0');
      if (!in.read(text.data(), static_cast<std::streamsize>(n))) throw fail("truncated blob '" + name + "'");
      ck.blobs.emplace(name, std::move(text));
      continue;
    }
    diff::Tensor<float> t(dims);
    for (auto& v : t.data()) {
      bool ok = false;
      if (dtype == kF32) {
        ok = bin::get_f32(in, v);
      } else if (dtype == kF64) {
        double d = 0;
        ok = bin::get_f64(in, d);
        v = static_cast<float>(d);
      } else {
        throw fail("unknown dtype " + std::to_string(dtype) + " for '" + name + "'");
      }
      if (!ok) throw fail("truncated data for '" + name + "'");
    }
    ck.params.add(name, std::move(t));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw fail("trailing bytes");
  return ck;
}

}  // namespace sswp::enc
