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

#include "sswp/encoders/config.h"

#include "sswp/common/error.h"

namespace sswp::enc {

void EncoderConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("encoder config: " + msg);
  };
  need(text.vocab_size > 8, "text.vocab_size must exceed the reserved ids");
  need(text.max_len >= 1, "text.max_len must be >= 1");
  need(text.dim >= 1 && text.layers >= 0 && text.ffn_mult >= 1, "text dims must be positive");
  need(text.heads >= 1 && text.dim % text.heads == 0, "text.dim must be divisible by text.heads");
  need(audio.feat_dim >= 1 && audio.dim >= 1 && audio.layers >= 0 && audio.ffn_mult >= 1,
       "audio dims must be positive");
  need(audio.heads >= 1 && audio.dim % audio.heads == 0,
       "audio.dim must be divisible by audio.heads");
  need(audio.kernel >= 1 && audio.kernel % 2 == 1, "audio.kernel must be odd");
  need(joint_dim >= 1, "joint_dim must be >= 1");
}

void EncoderConfig::write_toml(TomlWriter& w) const {
  w.add("text.vocab_size", text.vocab_size)
      .add("text.max_len", text.max_len)
      .add("text.dim", text.dim)
      .add("text.layers", text.layers)
      .add("text.heads", text.heads)
      .add("text.ffn_mult", text.ffn_mult)
      .add("audio.feat_dim", audio.feat_dim)
      .add("audio.dim", audio.dim)
      .add("audio.layers", audio.layers)
      .add("audio.heads", audio.heads)
      .add("audio.kernel", audio.kernel)
      .add("audio.ffn_mult", audio.ffn_mult)
      .add("joint_dim", joint_dim);
}

EncoderConfig EncoderConfig::from_flat(const FlatConfig& f) { return from_flat(f, EncoderConfig{}); }

EncoderConfig EncoderConfig::from_flat(const FlatConfig& f, EncoderConfig c) {
  c.text.vocab_size = f.get_int("text.vocab_size", c.text.vocab_size);
  c.text.max_len = f.get_int("text.max_len", c.text.max_len);
  c.text.dim = f.get_int("text.dim", c.text.dim);
  c.text.layers = f.get_int("text.layers", c.text.layers);
  c.text.heads = f.get_int("text.heads", c.text.heads);
  c.text.ffn_mult = f.get_int("text.ffn_mult", c.text.ffn_mult);
  c.audio.feat_dim = f.get_int("audio.feat_dim", c.audio.feat_dim);
  c.audio.dim = f.get_int("audio.dim", c.audio.dim);
  c.audio.layers = f.get_int("audio.layers", c.audio.layers);
  c.audio.heads = f.get_int("audio.heads", c.audio.heads);
  c.audio.kernel = f.get_int("audio.kernel", c.audio.kernel);
  c.audio.ffn_mult = f.get_int("audio.ffn_mult", c.audio.ffn_mult);
  c.joint_dim = f.get_int("joint_dim", c.joint_dim);
  return c;
}

}  // namespace sswp::enc
