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

#include "sswp/encoders/unit_inputs.h"

#include <map>

namespace sswp::enc {

UnitInputs gather_unit_inputs(const corpus::UnitTable& table,
                              std::span<const corpus::UnitRef> refs) {
  UnitInputs in;
  std::map<int, int> seq_of;
  for (const auto& r : refs) {
    auto [it, fresh] = seq_of.try_emplace(r.utterance, static_cast<int>(in.text.sequences.size()));
    if (fresh) in.text.sequences.push_back(table.subwords(r.utterance));
    const auto& u = table.unit(r);
    in.text.ranges.push_back({it->second, u.subword_begin, u.subword_end});
    in.audio.push_back({&table.corpus()[r.utterance].frames, u.frame_begin, u.frame_end});
  }
  return in;
}

UnitEmbeddings embed_units(diff::Binder<float>& bind, const EncoderConfig& cfg,
                           const corpus::UnitTable& table,
                           std::span<const corpus::UnitRef> refs) {
  const auto in = gather_unit_inputs(table, refs);
  return {encode_text(bind, cfg.text, in.text),
          encode_audio(bind, cfg.audio, std::span<const FrameSpan>(in.audio))};
}

}  // namespace sswp::enc
