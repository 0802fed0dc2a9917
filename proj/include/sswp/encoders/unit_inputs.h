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

#ifndef SSWP_ENCODERS_UNIT_INPUTS_H_
#define SSWP_ENCODERS_UNIT_INPUTS_H_

#include <span>
#include <vector>

#include "sswp/corpus/units.h"
#include "sswp/encoders/encoders.h"

namespace sswp::enc {

// Encoder inputs for a list of units. Each distinct utterance is encoded once
// on the text side; row i of both outputs corresponds to refs[i].
struct UnitInputs {
  TextBatch text;
  std::vector<FrameSpan> audio;
};

UnitInputs gather_unit_inputs(const corpus::UnitTable& table,
                              std::span<const corpus::UnitRef> refs);

struct UnitEmbeddings {
  diff::Expr<float> text;
  diff::Expr<float> audio;
};

UnitEmbeddings embed_units(diff::Binder<float>& bind, const EncoderConfig& cfg,
                           const corpus::UnitTable& table,
                           std::span<const corpus::UnitRef> refs);

}  // namespace sswp::enc

#endif  // SSWP_ENCODERS_UNIT_INPUTS_H_
