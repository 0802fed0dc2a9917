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

#ifndef SSWP_ENCODERS_CHECKPOINT_H_
#define SSWP_ENCODERS_CHECKPOINT_H_

#include <map>
#include <string>

#include "sswp/diffcore/parameter.h"

namespace sswp::enc {

// Named-tensor checkpoint. Tensors are stored as f32 and blobs as raw
// UTF-8 (dtype 2), e.g. an embedded config under "meta.config".
struct Checkpoint {
  diff::ParamStore<float> params;
  std::map<std::string, std::string> blobs;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const diff::ParamStore<float>& params,
                     const std::map<std::string, std::string>& blobs = {});
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sswp::enc

#endif  // SSWP_ENCODERS_CHECKPOINT_H_
