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

#include "biasforge/random.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "biasforge/errors.h"

namespace biasforge {

uint64_t Rng::UniformIndex(uint64_t bound) {
  if (bound == 0) throw UsageError("UniformIndex: bound must be positive");
  constexpr uint64_t kMax = std::numeric_limits<uint64_t>::max();
  // 2^64 mod bound; draws in the top `rem` values are biased.
  const uint64_t rem = (kMax % bound + 1) % bound;
  uint64_t x = engine_();
  if (rem != 0) {
    while (x > kMax - rem) x = engine_();
  }
  return x % bound;
}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::Normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - Uniform();  // (0, 1]
  const double u2 = Uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<size_t> SampleIndices(size_t n, size_t count, uint64_t seed) {
  if (count > n) throw UsageError("sample size exceeds population");
  std::vector<size_t> rows(n);
  std::iota(rows.begin(), rows.end(), size_t{0});
  Rng rng(seed);
  Shuffle(std::span<size_t>(rows), rng);
  rows.resize(count);
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<std::string> SampleIds(std::vector<std::string> ids, size_t count,
                                   uint64_t seed) {
  if (count > ids.size()) throw UsageError("sample size exceeds population");
  std::sort(ids.begin(), ids.end());
  Rng rng(seed);
  Shuffle(std::span<std::string>(ids), rng);
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace biasforge
