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

#include <algorithm>

#include "biasforge/errors.h"
#include "biasforge/random.h"

namespace biasforge {

namespace {

IdSet Difference(const IdSet& universe, const IdSet& remove, const char* side) {
  for (const auto& id : remove) {
    if (!universe.contains(id)) {
      throw DataError(std::string("hard ") + side + " id '" + id +
                      "' is not in the " + side + " universe");
    }
  }
  IdSet out;
  std::set_difference(universe.begin(), universe.end(), remove.begin(),
                      remove.end(), std::inserter(out, out.end()));
  return out;
}

}  // namespace

SplitManifest BuildSplit(const SplitInputs& inputs) {
  if (!inputs.params.is_object()) throw UsageError("split params must be an object");
  SplitManifest m;
  m.method = inputs.method;
  m.params = inputs.params;
  m.dataset_id = inputs.dataset_id;
  m.input_digests = inputs.input_digests;
  m.train_easy = Difference(inputs.train_ids, inputs.hard_train, "train");
  m.train_hard = inputs.hard_train;
  m.test_easy = Difference(inputs.test_ids, inputs.hard_test, "test");
  m.test_hard = inputs.hard_test;
  if (m.train_easy.empty()) m.warnings.push_back(kEmptyEasyTrainWarning);
  m.Validate();
  return m;
}

IdSet ReconcileQ(const ScoreTable& train_scores, size_t target_easy_size) {
  const size_t n = train_scores.size();
  if (target_easy_size > n) {
    throw UsageError("reconcile: target easy size " +
                     std::to_string(target_easy_size) + " exceeds " +
                     std::to_string(n) + " scored ids");
  }
  return SelectHardCount(train_scores, n - target_easy_size);
}

SplitManifest RandomBaseline(const IdSet& train_ids, const IdSet& test_ids,
                             size_t size, uint64_t seed) {
  if (size > train_ids.size()) {
    throw UsageError("random baseline: size " + std::to_string(size) +
                     " exceeds the " + std::to_string(train_ids.size()) +
                     " training ids");
  }
  const std::vector<std::string> sample = SampleIds(
      std::vector<std::string>(train_ids.begin(), train_ids.end()), size, seed);
  SplitInputs in;
  in.train_ids = train_ids;
  in.test_ids = test_ids;
  const IdSet easy(sample.begin(), sample.end());
  std::set_difference(train_ids.begin(), train_ids.end(), easy.begin(),
                      easy.end(), std::inserter(in.hard_train, in.hard_train.end()));
  in.method = SplitMethod::kRandom;
  in.params = {{"size", size}, {"seed", seed}};
  return BuildSplit(in);
}

std::vector<SplitManifest> ReinsertionSchedule(const SplitManifest& manifest,
                                               std::span<const double> fractions,
                                               uint64_t seed) {
  for (size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] >= 0.0 && fractions[i] <= 1.0)) {
      throw UsageError("reinsertion fractions must lie in [0, 1]");
    }
    if (i > 0 && fractions[i] < fractions[i - 1]) {
      throw UsageError("reinsertion fractions must be sorted ascending");
    }
  }
  std::vector<std::string> order(manifest.train_hard.begin(),
                                 manifest.train_hard.end());
  Rng rng(seed);
  Shuffle(std::span(order), rng);

  std::vector<SplitManifest> out;
  for (double f : fractions) {
    const size_t count = FloorFractionCount(order.size(), f);
    SplitManifest m = manifest;
    for (size_t i = 0; i < count; ++i) {
      m.train_hard.erase(order[i]);
      m.train_easy.insert(order[i]);
    }
    m.params["reinsert_fraction"] = f;
    m.params["reinsert_count"] = count;
    m.params["reinsert_seed"] = seed;
    std::erase(m.warnings, std::string(kEmptyEasyTrainWarning));
    if (m.train_easy.empty()) m.warnings.push_back(kEmptyEasyTrainWarning);
    m.Validate();
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace biasforge
