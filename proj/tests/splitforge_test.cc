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

#include "biasforge/splitforge.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "biasforge/errors.h"
#include "biasforge/minority.h"
#include "biasforge/random.h"
#include "test_util.h"

namespace biasforge {
namespace {

const std::filesystem::path kData = BIASFORGE_TEST_DATA_DIR;

IdSet Numbered(size_t n, const std::string& prefix = "id") {
  IdSet out;
  for (size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04zu", i);
    out.insert(prefix + buf);
  }
  return out;
}

bool Subset(const IdSet& a, const IdSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

TEST(BuildSplitTest, EmptyHardSetsKeepEverythingEasy) {
  SplitInputs in;
  in.train_ids = {"a", "b"};
  in.test_ids = {"c"};
  const SplitManifest m = BuildSplit(in);
  EXPECT_EQ(m.train_easy, in.train_ids);
  EXPECT_EQ(m.test_easy, in.test_ids);
  EXPECT_TRUE(m.warnings.empty());
}

TEST(BuildSplitTest, AllHardIsValidButWarned) {
  SplitInputs in;
  in.train_ids = {"a", "b"};
  in.hard_train = in.train_ids;
  const SplitManifest m = BuildSplit(in);
  EXPECT_TRUE(m.train_easy.empty());
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_EQ(m.warnings[0], kEmptyEasyTrainWarning);
  EXPECT_EQ(ParseManifest(SerializeManifest(m)), m);
}

TEST(BuildSplitTest, HardOutsideUniverseErrors) {
  SplitInputs in;
  in.train_ids = {"a"};
  in.hard_train = {"z"};
  EXPECT_THROW(BuildSplit(in), DataError);
  in.hard_train = {};
  in.hard_test = {"a"};
  EXPECT_THROW(BuildSplit(in), DataError);
}

TEST(BuildSplitTest, MinorityFixtureEasySize) {
  const InstanceTable t = testing::LabelTable(
      {{"a1", "A"}, {"a2", "A"}, {"a3", "A"}, {"a4", "A"}, {"a5", "A"},
       {"b1", "B"}, {"b2", "B"}, {"b3", "B"}, {"c1", "C"}, {"c2", "C"}});
  const ClusterAssignment a =
      testing::MakeAssignment(t.OrderedIds(), std::vector<int>(10, 0), 1);
  SplitInputs in;
  in.train_ids = t.Ids();
  in.hard_train = TrainMinority(a, t, MinorityMode::kAllButMajority);
  in.method = SplitMethod::kMinority;
  in.params = {{"k", 1}, {"minority_mode", "all_but_majority"}};
  const SplitManifest m = BuildSplit(in);
  EXPECT_EQ(m.train_easy.size(), 10u - 5u);
  EXPECT_EQ(m.params["k"], 1);
}

TEST(ReconcileTest, EasyFractionMatchesTarget) {
  Rng rng(12);
  std::vector<ScoredId> entries;
  for (const auto& id : Numbered(1000)) entries.push_back({id, rng.Uniform()});
  const ScoreTable scores("confidence", entries);
  EXPECT_TRUE(ReconcileQ(scores, 1000).empty());
  const IdSet hard = ReconcileQ(scores, 820);
  EXPECT_EQ(hard.size(), 180u);
  EXPECT_DOUBLE_EQ((1000.0 - hard.size()) / 1000.0, 0.82);
  EXPECT_EQ(hard, SelectHardCount(scores, 180));
  EXPECT_THROW(ReconcileQ(scores, 1001), UsageError);
}

TEST(ReconcileTest, ExactSizeWithTiesAtBoundary) {
  std::vector<ScoredId> entries;
  for (const auto& id : Numbered(50)) entries.push_back({id, 0.5});
  const ScoreTable scores("confidence", entries);
  for (size_t target = 0; target <= 50; target += 7) {
    EXPECT_EQ(ReconcileQ(scores, target).size(), 50 - target);
  }
}

TEST(RandomBaselineTest, MatchesGoldenFile) {
  const SplitManifest m = RandomBaseline(Numbered(1000), {"t1", "t2"}, 820, 7);
  const IdSet golden = LoadIdList(kData / "random_baseline_seed7_820of1000.txt");
  ASSERT_EQ(golden.size(), 820u);
  EXPECT_EQ(m.train_easy, golden);
  EXPECT_EQ(m.train_hard.size(), 180u);
  EXPECT_EQ(m.test_easy, (IdSet{"t1", "t2"}));
  EXPECT_TRUE(m.test_hard.empty());
  EXPECT_EQ(m.method, SplitMethod::kRandom);
  EXPECT_EQ(m.params["seed"], 7);
}

TEST(RandomBaselineTest, DeterministicFullAndBounded) {
  const IdSet ids = Numbered(300);
  EXPECT_EQ(RandomBaseline(ids, {}, 120, 5), RandomBaseline(ids, {}, 120, 5));
  EXPECT_NE(RandomBaseline(ids, {}, 120, 5).train_easy,
            RandomBaseline(ids, {}, 120, 6).train_easy);
  EXPECT_EQ(RandomBaseline(ids, {}, 300, 1).train_easy, ids);
  EXPECT_THROW(RandomBaseline(ids, {}, 301, 1), UsageError);
}

TEST(RandomBaselineTest, InclusionFrequenciesAreUniform) {
  // Each id of 20 is drawn with probability 5/20 per seed; across 4000 seeds
  // the chi-square statistic over ids has 19 degrees of freedom.
  const IdSet ids = Numbered(20);
  std::map<std::string, double> hits;
  const int seeds = 4000;
  for (int s = 0; s < seeds; ++s) {
    for (const auto& id : RandomBaseline(ids, {}, 5, s).train_easy) hits[id] += 1;
  }
  const double expected = seeds * 5.0 / 20.0;
  double chi2 = 0.0;
  for (const auto& id : ids) {
    chi2 += (hits[id] - expected) * (hits[id] - expected) / expected;
  }
  // 19 dof: the 0.999 quantile is 43.8.
  EXPECT_LT(chi2, 43.8);
}

SplitManifest HardFixture(size_t hard) {
  SplitInputs in;
  in.train_ids = Numbered(hard + 50);
  in.test_ids = Numbered(30, "te");
  for (const auto& id : Numbered(hard)) in.hard_train.insert(id);
  in.hard_test = {"te0003", "te0004"};
  in.method = SplitMethod::kCartography;
  return BuildSplit(in);
}

TEST(ReinsertionTest, PublishedFractionsSizesAndNesting) {
  const SplitManifest base = HardFixture(200);
  const std::vector<double> fractions = {0.1, 0.2, 0.35, 0.5, 0.7};
  const auto schedule = ReinsertionSchedule(base, fractions, 3);
  ASSERT_EQ(schedule.size(), 5u);
  const size_t expected[] = {20, 40, 70, 100, 140};
  IdSet previous;
  for (size_t i = 0; i < schedule.size(); ++i) {
    const SplitManifest& m = schedule[i];
    IdSet reinserted;
    std::set_difference(m.train_easy.begin(), m.train_easy.end(),
                        base.train_easy.begin(), base.train_easy.end(),
                        std::inserter(reinserted, reinserted.end()));
    EXPECT_EQ(reinserted.size(), expected[i]);
    EXPECT_TRUE(Subset(previous, reinserted));
    EXPECT_TRUE(Subset(reinserted, base.train_hard));
    EXPECT_EQ(m.test_easy, base.test_easy);
    EXPECT_EQ(m.test_hard, base.test_hard);
    EXPECT_EQ(m.TrainIds(), base.TrainIds());
    EXPECT_EQ(m.params["reinsert_count"], expected[i]);
    previous = reinserted;
  }
}

TEST(ReinsertionTest, EndpointsAndErrors) {
  const SplitManifest base = HardFixture(33);
  const std::vector<double> ends = {0.0, 1.0};
  const auto s = ReinsertionSchedule(base, ends, 8);
  EXPECT_EQ(s[0].train_easy, base.train_easy);
  EXPECT_EQ(s[0].train_hard, base.train_hard);
  EXPECT_EQ(s[1].train_easy, base.TrainIds());
  EXPECT_TRUE(s[1].train_hard.empty());
  const std::vector<double> unsorted = {0.5, 0.2};
  EXPECT_THROW(ReinsertionSchedule(base, unsorted, 1), UsageError);
  const std::vector<double> outside = {1.5};
  EXPECT_THROW(ReinsertionSchedule(base, outside, 1), UsageError);
}

TEST(ReinsertionTest, FloorRounding) {
  const SplitManifest base = HardFixture(7);
  const std::vector<double> f = {0.29, 0.5};
  const auto s = ReinsertionSchedule(base, f, 2);
  EXPECT_EQ(s[0].params["reinsert_count"], 2);  // floor(2.03)
  EXPECT_EQ(s[1].params["reinsert_count"], 3);  // floor(3.5)
}

}  // namespace
}  // namespace biasforge
