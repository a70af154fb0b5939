// Copyright 2026 The Biasforge Authors.
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

#ifndef BIASFORGE_SRC_SCREEN_KERNELS_H_
#define BIASFORGE_SRC_SCREEN_KERNELS_H_

#include <cstddef>
#include <cstdint>
#include <cstring>

namespace biasforge::internal {

// Screening values only choose which candidates get re-scored in double
// precision, so these kernels never influence output bits and are free to
// use whatever vector width the host offers.

// out[i] = squared single-precision distance between `query` and row i of
// the row-major `rows` block, for i in [0, count). Relative error bounded by
// FloatSumRelativeError(d).
void ScreenDistances(const float* query, const float* rows, size_t count,
                     size_t d, float* out);

// Same over bfloat16 rows (the upper half of an IEEE single).
void ScreenDistancesBf16(const float* query, const uint16_t* rows,
                         size_t count, size_t d, float* out);

// Round-to-nearest-even; relative error at most 2^-9 for normal values.
inline uint16_t ToBf16(float x) {
  uint32_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  bits += 0x7FFFu + ((bits >> 16) & 1u);
  return static_cast<uint16_t>(bits >> 16);
}

inline float FromBf16(uint16_t h) {
  const uint32_t bits = static_cast<uint32_t>(h) << 16;
  float x;
  std::memcpy(&x, &bits, sizeof x);
  return x;
}

}  // namespace biasforge::internal

#endif  // BIASFORGE_SRC_SCREEN_KERNELS_H_
