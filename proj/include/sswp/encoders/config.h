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

#ifndef SSWP_ENCODERS_CONFIG_H_
#define SSWP_ENCODERS_CONFIG_H_

#include <string>

#include "sswp/common/flat_config.h"

namespace sswp::enc {

struct TextEncoderConfig {
  int vocab_size = 520;  // subword ids incl. reserved ids
  int max_len = 256;
  int dim = 64;
  int layers = 2;
  int heads = 4;
  int ffn_mult = 4;

  bool operator==(const TextEncoderConfig&) const = default;
};

struct AudioEncoderConfig {
  int feat_dim = 16;
  int dim = 64;
  int layers = 2;
  int heads = 4;
  int kernel = 7;
  int ffn_mult = 4;

  bool operator==(const AudioEncoderConfig&) const = default;
};

struct EncoderConfig {
  TextEncoderConfig text;
  AudioEncoderConfig audio;
  int joint_dim = 64;

  // Throws ConfigError.
  void validate() const;
  // Keys: text.vocab_size, text.dim, ..., audio.kernel, joint_dim.
  void write_toml(TomlWriter& w) const;
  static EncoderConfig from_flat(const FlatConfig& f, EncoderConfig base);
  static EncoderConfig from_flat(const FlatConfig& f);
  bool operator==(const EncoderConfig&) const = default;
};

}  // namespace sswp::enc

#endif  // SSWP_ENCODERS_CONFIG_H_
