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

#include <gtest/gtest.h>

#include <limits>

#include "biasforge/errors.h"
#include "biasforge/parallel.h"
#include "oracles/nearest_bruteforce.h"
#include "test_util.h"

namespace biasforge {
namespace {

using testing::RandomEmbeddings;

using oracle::BruteForceNearest;

TEST(NearestNeighborsTest, MatchesBruteForce) {
  for (size_t d : {1u, 7u, 64u, 130u}) {
    const EmbeddingSet q = RandomEmbeddings(97, d, 100 + d, 1.0, "q");
    const EmbeddingSet r = RandomEmbeddings(301, d, 200 + d, 1.0, "r");
    EXPECT_EQ(NearestNeighbors(q, r), BruteForceNearest(q, r)) << "d=" << d;
  }
}

TEST(NearestNeighborsTest, TiesGoToSmallestIndex) {
  // Query at the origin, three references at distance 1.
  const EmbeddingSet q({"q"}, 2, {0.f, 0.f});
  const EmbeddingSet r({"a", "b", "c", "d"}, 2,
                       {5.f, 5.f, 0.f, 1.f, 1.f, 0.f, 0.f, -1.f});
  EXPECT_EQ(NearestNeighbors(q, r), std::vector<size_t>{1});
}

TEST(NearestNeighborsTest, DuplicateReferenceRows) {
  const EmbeddingSet r = RandomEmbeddings(50, 16, 5, 1.0, "r");
  std::vector<float> doubled(r.values().begin(), r.values().end());
  doubled.insert(doubled.end(), r.values().begin(), r.values().end());
  std::vector<std::string> ids = r.ids();
  for (const auto& id : r.ids()) ids.push_back(id + "x");
  const EmbeddingSet rr(ids, 16, doubled);
  const std::vector<size_t> got = NearestNeighbors(r, rr);
  for (size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], i);
}

TEST(NearestNeighborsTest, NearlyEqualCandidatesResolvedExactly) {
  // Candidates whose distances differ below single-precision resolution
  // of the accumulated sum.
  const size_t d = 64;
  std::vector<float> ref(3 * d, 100.0f);
  ref[d + 5] = 100.0f + 1.0f / 1024.0f;
  ref[2 * d + 7] = 100.0f - 1.0f / 2048.0f;
  std::vector<float> query(d, 100.0f);
  query[7] = 100.0f - 1.0f / 4096.0f;
  ref[0] = 100.0f + 1.0f / 512.0f;
  const std::vector<size_t> got = NearestNeighbors(query, ref, d);
  double best = std::numeric_limits<double>::infinity();
  size_t arg = 0;
  for (size_t j = 0; j < 3; ++j) {
    const double dist =
        ExactSquaredDistance(std::span(query), std::span(ref).subspan(j * d, d));
    if (dist < best) {
      best = dist;
      arg = j;
    }
  }
  EXPECT_EQ(got, std::vector<size_t>{arg});
}

TEST(NearestNeighborsTest, IndependentOfThreadCount) {
  const EmbeddingSet q = RandomEmbeddings(400, 32, 7, 1.0, "q");
  const EmbeddingSet r = RandomEmbeddings(900, 32, 8, 1.0, "r");
  SetThreadCount(1);
  const auto one = NearestNeighbors(q, r);
  SetThreadCount(4);
  EXPECT_EQ(NearestNeighbors(q, r), one);
  SetThreadCount(0);
}

TEST(NearestNeighborsTest, RejectsDimensionMismatch) {
  EXPECT_THROW(NearestNeighbors(RandomEmbeddings(3, 2, 1),
                                RandomEmbeddings(3, 3, 1)),
               DataError);
}

}  // namespace
}  // namespace biasforge
