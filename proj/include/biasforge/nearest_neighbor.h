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

#ifndef BIASFORGE_NEAREST_NEIGHBOR_H_
#define BIASFORGE_NEAREST_NEIGHBOR_H_

#include <cstddef>
#include <span>
#include <vector>

#include "biasforge/dataio.h"

namespace biasforge {

// Exact Euclidean 1-NN. For each query row returns the index of the closest
// reference row; exact distance ties resolve to the smallest reference index.
//
// Distances are screened in single precision over cache-sized blocks; every
// reference row whose single-precision distance lies within the rounding
// bound of the running minimum is re-scored in double precision, and the
// double-precision value decides. The result is therefore the exact
// double-precision argmin, independent of blocking and thread count.
std::vector<size_t> NearestNeighbors(std::span<const float> queries,
                                     std::span<const float> reference,
                                     size_t dim);
std::vector<size_t> NearestNeighbors(const EmbeddingSet& queries,
                                     const EmbeddingSet& reference);

// Double-precision squared distance used as the tie-deciding metric.
double ExactSquaredDistance(std::span<const float> a, std::span<const float> b);

}  // namespace biasforge

#endif  // BIASFORGE_NEAREST_NEIGHBOR_H_
