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

#ifndef BIASFORGE_RANDOM_H_
#define BIASFORGE_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace biasforge {

// Portable pseudo-random source. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; every derived quantity below is
// computed by hand rather than through <random> distributions, whose
// algorithms are implementation-defined. Golden files therefore match across
// standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform integer in [0, bound). Rejection sampling on the raw 64-bit draw:
  // draws at or above the largest multiple of `bound` are discarded, the
  // accepted draw is reduced modulo `bound`.
  uint64_t UniformIndex(uint64_t bound);

  // Uniform double in [0, 1) built from the top 53 bits of one draw.
  double Uniform();

  // Standard normal via Box-Muller; consumes two uniform draws per pair and
  // caches the second value.
  double Normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Fisher-Yates: for i = n-1 down to 1, swap element i with element
// UniformIndex(i + 1).
template <typename T>
void Shuffle(std::span<T> items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.UniformIndex(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

// Seeded uniform sample of `count` distinct row indices from [0, n), returned
// in ascending order: shuffle 0..n-1 with Shuffle(), keep the first `count`.
std::vector<size_t> SampleIndices(size_t n, size_t count, uint64_t seed);

// Same scheme over ids: sort the ids, shuffle the sorted list with a fresh
// Rng(seed), keep the first `count`, return them sorted.
std::vector<std::string> SampleIds(std::vector<std::string> ids, size_t count,
                                   uint64_t seed);

}  // namespace biasforge

#endif  // BIASFORGE_RANDOM_H_
