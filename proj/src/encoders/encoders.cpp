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

#include "sswp/encoders/encoders.h"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "sswp/common/error.h"

namespace sswp::enc {

using diff::Binder;
using diff::Expr;
using diff::ParamStore;
using diff::Tensor;

namespace {

template <typename T>
void add_linear(ParamStore<T>& ps, const std::string& name, int in, int out,
                std::mt19937_64& rng) {
  ps.add_glorot(name + ".w", in, out, rng);
  ps.add_const(name + ".b", {1, out}, T(0));
}

template <typename T>
void add_norm(ParamStore<T>& ps, const std::string& name, int dim) {
  ps.add_const(name + ".g", {1, dim}, T(1));
  ps.add_const(name + ".b", {1, dim}, T(0));
}

template <typename T>
void add_pool(ParamStore<T>& ps, const std::string& name, int dim, std::mt19937_64& rng) {
  ps.add_glorot(name + ".w", dim, dim, rng);
  ps.add_const(name + ".b", {1, dim}, T(0));
  ps.add_glorot(name + ".v", dim, 1, rng);
}

template <typename T>
void add_attention(ParamStore<T>& ps, const std::string& name, int dim, std::mt19937_64& rng) {
  for (const char* p : {"q", "k", "v", "o"}) add_linear(ps, name + "." + p, dim, dim, rng);
}

template <typename T>
void add_ffn(ParamStore<T>& ps, const std::string& name, int dim, int mult,
             std::mt19937_64& rng) {
  add_linear(ps, name + ".fc1", dim, dim * mult, rng);
  add_linear(ps, name + ".fc2", dim * mult, dim, rng);
}

template <typename T>
Expr<T> linear(Binder<T>& bind, const std::string& name, Expr<T> x) {
  return add(matmul(x, bind(name + ".w")), bind(name + ".b"));
}

template <typename T>
Expr<T> norm(Binder<T>& bind, const std::string& name, Expr<T> x) {
  return layer_norm(x, bind(name + ".g"), bind(name + ".b"));
}

template <typename T>
Expr<T> attention(Binder<T>& bind, const std::string& name, Expr<T> x, int seg_len, int heads,
                  std::span<const int> lens) {
  auto a = diff::segment_attention(linear(bind, name + ".q", x), linear(bind, name + ".k", x),
                                   linear(bind, name + ".v", x), seg_len, heads, lens);
  return linear(bind, name + ".o", a);
}

// Segment-major layout: row s * L + t. Returns the padded length L.
int padded_length(std::span<const int> lens) {
  int L = 0;
  for (int n : lens) L = std::max(L, n);
  return L;
}

}  // namespace

template <typename T>
void init_text_encoder(ParamStore<T>& ps, const TextEncoderConfig& cfg, int joint_dim,
                       std::mt19937_64& rng) {
  const int d = cfg.dim;
  ps.add_normal("text.embed", {cfg.vocab_size, d}, T(0.1), rng);
  ps.add_normal("text.pos", {cfg.max_len, d}, T(0.02), rng);
  for (int i = 0; i < cfg.layers; ++i) {
    const std::string b = "text.block" + std::to_string(i);
    add_norm(ps, b + ".ln1", d);
    add_attention(ps, b + ".attn", d, rng);
    add_norm(ps, b + ".ln2", d);
    add_ffn(ps, b + ".ffn", d, cfg.ffn_mult, rng);
  }
  add_norm(ps, "text.ln_f", d);
  add_pool(ps, "text.pool", d, rng);
  add_linear(ps, "text.proj", d, joint_dim, rng);
}

template <typename T>
void init_audio_encoder(ParamStore<T>& ps, const AudioEncoderConfig& cfg, int joint_dim,
                        std::mt19937_64& rng) {
  const int d = cfg.dim;
  add_linear(ps, "audio.in", cfg.feat_dim, d, rng);
  const T kb = T(1) / std::sqrt(static_cast<T>(cfg.kernel));
  for (int i = 0; i < cfg.layers; ++i) {
    const std::string b = "audio.block" + std::to_string(i);
    add_norm(ps, b + ".ffn1.ln", d);
    add_ffn(ps, b + ".ffn1", d, cfg.ffn_mult, rng);
    add_norm(ps, b + ".mhsa.ln", d);
    add_attention(ps, b + ".mhsa", d, rng);
    add_norm(ps, b + ".conv.ln", d);
    add_linear(ps, b + ".conv.pw1", d, 2 * d, rng);
    Tensor<T> dw = Tensor<T>::matrix(cfg.kernel, d);
    std::uniform_real_distribution<double> u(-kb, kb);
    for (auto& v : dw.data()) v = static_cast<T>(u(rng));
    ps.add(b + ".conv.dw.w", std::move(dw));
    ps.add_const(b + ".conv.dw.b", {1, d}, T(0));
    add_norm(ps, b + ".conv.norm", d);
    add_linear(ps, b + ".conv.pw2", d, d, rng);
    add_norm(ps, b + ".ffn2.ln", d);
    add_ffn(ps, b + ".ffn2", d, cfg.ffn_mult, rng);
    add_norm(ps, b + ".ln_out", d);
  }
  add_pool(ps, "audio.pool", d, rng);
  add_linear(ps, "audio.proj", d, joint_dim, rng);
}

template <typename T>
Expr<T> attentive_pool_weights(Binder<T>& bind, const std::string& prefix, Expr<T> h,
                               std::span<const int> lengths) {
  const int segs = static_cast<int>(lengths.size());
  if (segs == 0) throw ShapeError("attentive_pool: no segments");
  if (h.rows() % segs != 0) {
    throw ShapeError("attentive_pool: " + std::to_string(h.rows()) + " rows for " +
                     std::to_string(segs) + " segments");
  }
  const int L = h.rows() / segs;
  std::vector<std::uint8_t> pad(static_cast<std::size_t>(segs) * L, 0);
  for (int s = 0; s < segs; ++s) {
    if (lengths[s] < 1) throw ShapeError("attentive_pool: segment " + std::to_string(s) + " has no valid rows");
    if (lengths[s] > L) throw ShapeError("attentive_pool: segment length exceeds padded length");
    for (int t = lengths[s]; t < L; ++t) pad[static_cast<std::size_t>(s) * L + t] = 1;
  }
  auto feat = diff::tanh(linear(bind, prefix, h));  // uses <prefix>.w / .b
  auto scores = reshape(matmul(feat, bind(prefix + ".v")), {segs, L});
  scores = masked_fill(scores, std::span<const std::uint8_t>(pad), T(-1e30));
  return softmax(scores, 1);
}

template <typename T>
Expr<T> attentive_pool(Binder<T>& bind, const std::string& prefix, Expr<T> h,
                       std::span<const int> lengths) {
  return segment_weighted_sum(attentive_pool_weights(bind, prefix, h, lengths), h);
}

template <typename T>
Expr<T> text_hidden(Binder<T>& bind, const TextEncoderConfig& cfg,
                    const std::vector<std::vector<int>>& sequences, int* padded_len) {
  if (sequences.empty()) throw ShapeError("encode_text: no sequences");
  std::vector<int> lens;
  for (const auto& s : sequences) {
    if (s.empty()) throw ShapeError("encode_text: empty subword sequence");
    if (static_cast<int>(s.size()) > cfg.max_len) {
      throw ShapeError("encode_text: sequence of " + std::to_string(s.size()) +
                       " subwords exceeds max_len " + std::to_string(cfg.max_len));
    }
    lens.push_back(static_cast<int>(s.size()));
  }
  const int L = padded_length(lens);
  const int B = static_cast<int>(sequences.size());
  std::vector<int> ids(static_cast<std::size_t>(B) * L, -1), pos(ids.size(), -1);
  for (int b = 0; b < B; ++b) {
    for (int t = 0; t < lens[b]; ++t) {
      const int id = sequences[b][t];
      if (id < 0 || id >= cfg.vocab_size) {
        throw ShapeError("encode_text: subword id " + std::to_string(id) + " outside vocabulary of " +
                         std::to_string(cfg.vocab_size));
      }
      ids[static_cast<std::size_t>(b) * L + t] = id;
      pos[static_cast<std::size_t>(b) * L + t] = t;
    }
  }
  auto x = add(embedding(bind("text.embed"), std::span<const int>(ids)),
               embedding(bind("text.pos"), std::span<const int>(pos)));
  for (int i = 0; i < cfg.layers; ++i) {
    const std::string b = "text.block" + std::to_string(i);
    x = add(x, attention(bind, b + ".attn", norm(bind, b + ".ln1", x), L, cfg.heads, lens));
    auto h = norm(bind, b + ".ln2", x);
    x = add(x, linear(bind, b + ".ffn.fc2", gelu(linear(bind, b + ".ffn.fc1", h))));
  }
  if (padded_len) *padded_len = L;
  return norm(bind, "text.ln_f", x);
}

namespace {

constexpr int kMinBucket = 16;
constexpr int kMaxBuckets = 4;

// Splits items into groups of similar length so that little compute goes
// to padding. Groups are contiguous runs of the length-sorted order.
std::vector<std::vector<int>> length_buckets(const std::vector<int>& lens) {
  const int n = static_cast<int>(lens.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return lens[x] < lens[y]; });
  const int groups = std::clamp(n / kMinBucket, 1, kMaxBuckets);
  std::vector<std::vector<int>> out(groups);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i) * groups / n].push_back(order[i]);
  return out;
}

// Concatenates per-group rows and restores the original item order.
template <typename T>
Expr<T> unbucket(const std::vector<Expr<T>>& parts, const std::vector<std::vector<int>>& groups,
                 int n) {
  if (parts.size() == 1) {
    bool identity = true;
    for (int i = 0; i < n; ++i) identity = identity && groups[0][i] == i;
    if (identity) return parts[0];
  }
  std::vector<int> where(n);
  int row = 0;
  for (const auto& g : groups) {
    for (int item : g) where[item] = row++;
  }
  auto cat = parts.size() == 1 ? parts[0] : diff::concat(parts, 0);
  return gather_rows(cat, std::span<const int>(where));
}

template <typename T>
Expr<T> text_group(Binder<T>& bind, const TextEncoderConfig& cfg, const TextBatch& batch,
                   const std::vector<int>& seq_ids, const std::vector<int>& unit_ids) {
  std::vector<std::vector<int>> seqs;
  std::vector<int> local(batch.sequences.size(), -1);
  for (int s : seq_ids) {
    local[s] = static_cast<int>(seqs.size());
    seqs.push_back(batch.sequences[s]);
  }
  int L = 0;
  auto hidden = text_hidden(bind, cfg, seqs, &L);
  // Indexing layer: gather each unit's subword rows into its own segment.
  std::vector<int> lens;
  for (int u : unit_ids) lens.push_back(batch.ranges[u].end - batch.ranges[u].begin);
  const int Lu = padded_length(lens);
  std::vector<int> rows(unit_ids.size() * static_cast<std::size_t>(Lu), -1);
  for (std::size_t k = 0; k < unit_ids.size(); ++k) {
    const auto& r = batch.ranges[unit_ids[k]];
    for (int t = 0; t < lens[k]; ++t) rows[k * Lu + t] = local[r.sequence] * L + r.begin + t;
  }
  auto units = gather_rows(hidden, std::span<const int>(rows));
  return attentive_pool(bind, "text.pool", units, lens);
}

template <typename T>
Expr<T> audio_group(Binder<T>& bind, const AudioEncoderConfig& cfg,
                    std::span<const FrameSpan> spans, const std::vector<int>& ids) {
  std::vector<int> lens;
  for (int i : ids) lens.push_back(spans[i].end - spans[i].begin);
  const int S = static_cast<int>(ids.size());
  const int L = padded_length(lens);
  const int d = cfg.dim;
  Tensor<T> input = Tensor<T>::matrix(S * L, cfg.feat_dim);
  Tensor<T> valid = Tensor<T>::matrix(S * L, 1);
  Tensor<T> pe = Tensor<T>::matrix(S * L, d);
  std::vector<double> freq;
  for (int i = 0; i < d; i += 2) freq.push_back(std::pow(10000.0, -static_cast<double>(i) / d));
  for (int s = 0; s < S; ++s) {
    const auto& span = spans[ids[s]];
    for (int t = 0; t < lens[s]; ++t) {
      const int r = s * L + t;
      auto src = span.frames->row(span.begin + t);
      auto dst = input.row(r);
      for (int c = 0; c < cfg.feat_dim; ++c) dst[c] = static_cast<T>(src[c]);
      valid[r] = T(1);
      for (int i = 0; i < d; i += 2) {
        pe.at(r, i) = static_cast<T>(std::sin(t * freq[i / 2]));
        if (i + 1 < d) pe.at(r, i + 1) = static_cast<T>(std::cos(t * freq[i / 2]));
      }
    }
  }
  auto& g = bind.graph();
  auto mask = g.constant(std::move(valid));
  auto x = add(linear(bind, "audio.in", g.constant(std::move(input))), g.constant(std::move(pe)));
  auto ffn = [&](const std::string& name, Expr<T> in) {
    auto h = norm(bind, name + ".ln", in);
    return linear(bind, name + ".fc2", swish(linear(bind, name + ".fc1", h)));
  };
  for (int i = 0; i < cfg.layers; ++i) {
    const std::string b = "audio.block" + std::to_string(i);
    x = add(x, scale(ffn(b + ".ffn1", x), T(0.5)));
    x = add(x, attention(bind, b + ".mhsa", norm(bind, b + ".mhsa.ln", x), L, cfg.heads, lens));
    {
      auto h = linear(bind, b + ".conv.pw1", norm(bind, b + ".conv.ln", x));
      h = mul(slice_cols(h, 0, d), sigmoid(slice_cols(h, d, 2 * d)));  // GLU
      h = mul(h, mask);  // padding must not leak into the convolution
      h = add(depthwise_conv1d(h, bind(b + ".conv.dw.w"), L), bind(b + ".conv.dw.b"));
      h = swish(norm(bind, b + ".conv.norm", h));
      x = add(x, linear(bind, b + ".conv.pw2", h));
    }
    x = add(x, scale(ffn(b + ".ffn2", x), T(0.5)));
    x = norm(bind, b + ".ln_out", x);
  }
  return attentive_pool(bind, "audio.pool", x, lens);
}

}  // namespace

template <typename T>
Expr<T> encode_text(Binder<T>& bind, const TextEncoderConfig& cfg, const TextBatch& batch) {
  if (batch.ranges.empty()) throw ShapeError("encode_text: no subword ranges requested");
  if (batch.sequences.empty()) throw ShapeError("encode_text: no sequences");
  for (const auto& r : batch.ranges) {
    if (r.sequence < 0 || r.sequence >= static_cast<int>(batch.sequences.size())) {
      throw ShapeError("encode_text: range refers to missing sequence " + std::to_string(r.sequence));
    }
    const int n = static_cast<int>(batch.sequences[r.sequence].size());
    if (r.begin < 0 || r.begin >= r.end || r.end > n) {
      throw ShapeError("encode_text: invalid subword range [" + std::to_string(r.begin) + "," +
                       std::to_string(r.end) + ") for sequence of length " + std::to_string(n));
    }
  }
  std::vector<int> seq_lens;
  for (const auto& s : batch.sequences) seq_lens.push_back(static_cast<int>(s.size()));
  const auto seq_groups = length_buckets(seq_lens);
  std::vector<int> group_of(batch.sequences.size());
  for (std::size_t g = 0; g < seq_groups.size(); ++g) {
    for (int s : seq_groups[g]) group_of[s] = static_cast<int>(g);
  }
  std::vector<std::vector<int>> unit_groups(seq_groups.size());
  for (int u = 0; u < static_cast<int>(batch.ranges.size()); ++u) {
    unit_groups[group_of[batch.ranges[u].sequence]].push_back(u);
  }
  std::vector<Expr<T>> parts;
  std::vector<std::vector<int>> used;
  for (std::size_t g = 0; g < seq_groups.size(); ++g) {
    if (unit_groups[g].empty()) continue;
    parts.push_back(text_group(bind, cfg, batch, seq_groups[g], unit_groups[g]));
    used.push_back(unit_groups[g]);
  }
  auto pooled = unbucket(parts, used, static_cast<int>(batch.ranges.size()));
  return linear(bind, "text.proj", pooled);
}

template <typename T>
Expr<T> encode_audio(Binder<T>& bind, const AudioEncoderConfig& cfg,
                     std::span<const FrameSpan> spans) {
  if (spans.empty()) throw ShapeError("encode_audio: no spans");
  std::vector<int> lens;
  for (const auto& s : spans) {
    if (s.frames == nullptr) throw ShapeError("encode_audio: span without frames");
    if (s.end <= s.begin) {
      throw ShapeError("encode_audio: empty span [" + std::to_string(s.begin) + "," +
                       std::to_string(s.end) + ")");
    }
    if (s.begin < 0 || s.end > s.frames->rows()) {
      throw ShapeError("encode_audio: span [" + std::to_string(s.begin) + "," + std::to_string(s.end) +
                       ") outside " + std::to_string(s.frames->rows()) + " frames");
    }
    if (s.frames->cols() != cfg.feat_dim) {
      throw ShapeError("encode_audio: frames have " + std::to_string(s.frames->cols()) +
                       " features, encoder expects " + std::to_string(cfg.feat_dim));
    }
    lens.push_back(s.end - s.begin);
  }
  const auto groups = length_buckets(lens);
  std::vector<Expr<T>> parts;
  for (const auto& g : groups) parts.push_back(audio_group(bind, cfg, spans, g));
  auto pooled = unbucket(parts, groups, static_cast<int>(spans.size()));
  return linear(bind, "audio.proj", pooled);
}

#define SSWP_INSTANTIATE_ENCODERS(T)                                                           \
  template void init_text_encoder(ParamStore<T>&, const TextEncoderConfig&, int,               \
                                  std::mt19937_64&);                                          \
  template void init_audio_encoder(ParamStore<T>&, const AudioEncoderConfig&, int,             \
                                   std::mt19937_64&);                                         \
  template Expr<T> attentive_pool_weights(Binder<T>&, const std::string&, Expr<T>,             \
                                          std::span<const int>);                              \
  template Expr<T> attentive_pool(Binder<T>&, const std::string&, Expr<T>,                     \
                                  std::span<const int>);                                      \
  template Expr<T> text_hidden(Binder<T>&, const TextEncoderConfig&,                           \
                               const std::vector<std::vector<int>>&, int*);                    \
  template Expr<T> encode_text(Binder<T>&, const TextEncoderConfig&, const TextBatch&);        \
  template Expr<T> encode_audio(Binder<T>&, const AudioEncoderConfig&, std::span<const FrameSpan>);

SSWP_INSTANTIATE_ENCODERS(float)
SSWP_INSTANTIATE_ENCODERS(double)

#undef SSWP_INSTANTIATE_ENCODERS

}  // namespace sswp::enc
