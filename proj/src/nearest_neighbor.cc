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

#include "biasforge/nearest_neighbor.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "biasforge/errors.h"
#include "distance_kernels.h"
#include "screen_kernels.h"

namespace biasforge {
namespace {

constexpr size_t kQueryBlock = 32;
constexpr size_t kReferenceBlockBytes = 256 * 1024;
// Absolute slack covering gradual underflow in single-precision squares.
constexpr double kUnderflowSlackPerDim = 1e-44;

struct Candidate {
  float screened;
  size_t row;
};

class QueryState {
 public:
  QueryState(double ratio, double slack) : ratio_(ratio), slack_(slack) {}

  void Offer(float screened, size_t row) {
    if (static_cast<double>(screened) > threshold_) return;
    candidates_.push_back({screened, row});
    if (screened < best_) {
      best_ = screened;
      threshold_ = static_cast<double>(best_) * ratio_ + slack_;
      if (candidates_.size() > 64) Prune();
    }
  }

  size_t Resolve(const float* query, const float* reference, size_t dim) {
    Prune();
    size_t best_row = std::numeric_limits<size_t>::max();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates_) {
      const double exact = internal::SquaredDistance<double>(
          query, reference + c.row * dim, dim);
      if (exact < best || (exact == best && c.row < best_row)) {
        best = exact;
        best_row = c.row;
      }
    }
    return best_row;
  }

 private:
  void Prune() {
    std::erase_if(candidates_, [&](const Candidate& c) {
      return static_cast<double>(c.screened) > threshold_;
    });
  }

  double ratio_;
  double slack_;
  float best_ = std::numeric_limits<float>::infinity();
  double threshold_ = std::numeric_limits<double>::infinity();
  std::vector<Candidate> candidates_;
};

}  // namespace

std::vector<size_t> NearestNeighbors(std::span<const float> queries,
                                     std::span<const float> reference,
                                     size_t dim) {
  if (dim == 0) throw UsageError("nearest neighbors: dimension must be >= 1");
  if (queries.size() % dim != 0 || reference.size() % dim != 0) {
    throw UsageError("nearest neighbors: matrix size is not a multiple of d");
  }
  const size_t nq = queries.size() / dim;
  const size_t nr = reference.size() / dim;
  if (nr == 0) throw UsageError("nearest neighbors: empty reference set");

  const double gamma = internal::FloatSumRelativeError(dim);
  const double ratio = (1.0 + gamma) / (1.0 - gamma);
  const double slack = kUnderflowSlackPerDim * static_cast<double>(dim);
  const size_t ref_block =
      std::max<size_t>(1, kReferenceBlockBytes / (dim * sizeof(float)));

  std::vector<size_t> result(nq);
  const long query_blocks = static_cast<long>((nq + kQueryBlock - 1) / kQueryBlock);
  const float* q_data = queries.data();
  const float* r_data = reference.data();

#pragma omp parallel for schedule(dynamic, 4)
  for (long qb = 0; qb < query_blocks; ++qb) {
    const size_t q_begin = static_cast<size_t>(qb) * kQueryBlock;
    const size_t q_end = std::min(nq, q_begin + kQueryBlock);
    std::vector<QueryState> states(q_end - q_begin, QueryState(ratio, slack));
    std::vector<float> screened(ref_block);
    for (size_t r_begin = 0; r_begin < nr; r_begin += ref_block) {
      const size_t r_end = std::min(nr, r_begin + ref_block);
      for (size_t q = q_begin; q < q_end; ++q) {
        internal::ScreenDistances(q_data + q * dim, r_data + r_begin * dim,
                                  r_end - r_begin, dim, screened.data());
        QueryState& state = states[q - q_begin];
        for (size_t r = r_begin; r < r_end; ++r) {
          state.Offer(screened[r - r_begin], r);
        }
      }
    }
    for (size_t q = q_begin; q < q_end; ++q) {
      result[q] = states[q - q_begin].Resolve(q_data + q * dim, r_data, dim);
    }
  }
  return result;
}

std::vector<size_t> NearestNeighbors(const EmbeddingSet& queries,
                                     const EmbeddingSet& reference) {
  if (queries.dim() != reference.dim()) {
    throw DataError("nearest neighbors: dimensionality mismatch (" +
                    std::to_string(queries.dim()) + " vs " +
                    std::to_string(reference.dim()) + ")");
  }
  return NearestNeighbors(queries.values(), reference.values(), queries.dim());
}

double ExactSquaredDistance(std::span<const float> a, std::span<const float> b) {
  return internal::SquaredDistance<double>(a.data(), b.data(), a.size());
}

}  // namespace biasforge
