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

#ifndef BIASFORGE_SRC_DISTANCE_KERNELS_H_
#define BIASFORGE_SRC_DISTANCE_KERNELS_H_

#include <cstddef>
#include <limits>

namespace biasforge::internal {

// Squared Euclidean distance accumulated in eight independent lanes that are
// combined pairwise at the end. The association order is fixed, so any
// vectorization the compiler applies yields the same bits.
template <typename Acc, typename In>
inline Acc SquaredDistance(const In* a, const In* b, size_t d) {
  Acc lane[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  size_t j = 0;
  for (; j + 8 <= d; j += 8) {
    for (size_t l = 0; l < 8; ++l) {
      const Acc t = static_cast<Acc>(a[j + l]) - static_cast<Acc>(b[j + l]);
      lane[l] += t * t;
    }
  }
  for (size_t l = 0; j < d; ++j, ++l) {
    const Acc t = static_cast<Acc>(a[j]) - static_cast<Acc>(b[j]);
    lane[l] += t * t;
  }
  return ((lane[0] + lane[1]) + (lane[2] + lane[3])) +
         ((lane[4] + lane[5]) + (lane[6] + lane[7]));
}

// Bound on the relative rounding error of a single-precision squared
// distance over d dimensions, for either SquaredDistance<float> or the
// sixteen-lane screen: one rounding for the difference, one for the square,
// at most ceil(d/8) additions per lane and up to sixteen combining additions.
// Doubled as margin.
inline double FloatSumRelativeError(size_t d) {
  constexpr double kUnit = std::numeric_limits<float>::epsilon() / 2;
  return 2.0 * kUnit * static_cast<double>(18 + (d + 7) / 8);
}

}  // namespace biasforge::internal

#endif  // BIASFORGE_SRC_DISTANCE_KERNELS_H_
