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

#ifndef SSWP_COMMON_BINARY_IO_H_
#define SSWP_COMMON_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

namespace sswp::bin {

// Little-endian fixed-width encoding independent of host byte order.
template <typename U>
void put_uint(std::ostream& out, U v) {
  char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, sizeof(U));
}

inline void put_f32(std::ostream& out, float v) { put_uint(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_uint(out, std::bit_cast<std::uint64_t>(v)); }

// Returns false on short read.
template <typename U>
bool get_uint(std::istream& in, U& v) {
  unsigned char b[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(U))) return false;
  v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return true;
}

inline bool get_f32(std::istream& in, float& v) {
  std::uint32_t u;
  if (!get_uint(in, u)) return false;
  v = std::bit_cast<float>(u);
  return true;
}

inline bool get_f64(std::istream& in, double& v) {
  std::uint64_t u;
  if (!get_uint(in, u)) return false;
  v = std::bit_cast<double>(u);
  return true;
}

}  // namespace sswp::bin

#endif  // SSWP_COMMON_BINARY_IO_H_
