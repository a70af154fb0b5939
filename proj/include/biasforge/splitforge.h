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

#ifndef BIASFORGE_SPLITFORGE_H_
#define BIASFORGE_SPLITFORGE_H_

// Assembly of easy/hard split manifests, train-size reconciliation across
// methods, size-matched random baselines and nested reinsertion schedules.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "biasforge/cartography.h"
#include "biasforge/dataio.h"

namespace biasforge {

struct SplitInputs {
  IdSet train_ids;
  IdSet test_ids;
  IdSet hard_train;
  IdSet hard_test;
  SplitMethod method = SplitMethod::kCustom;
  Json params = Json::object();
  std::string dataset_id;
  std::map<std::string, std::string> input_digests;
};

inline constexpr char kEmptyEasyTrainWarning[] =
    "train_easy is empty: every training instance is marked hard";

// easy = universe \ hard on each side. Throws DataError when a hard id lies
// outside its universe.
SplitManifest BuildSplit(const SplitInputs& inputs);

// Exactly n - target_easy_size lowest-scoring ids.
IdSet ReconcileQ(const ScoreTable& train_scores, size_t target_easy_size);

// train_easy is a seeded uniform sample (SampleIds) of `size` training ids,
// train_hard the rest; the whole test set is kept as test_easy.
SplitManifest RandomBaseline(const IdSet& train_ids, const IdSet& test_ids,
                             size_t size, uint64_t seed);

// One manifest per fraction f: the first floor(f * |train_hard|) ids of a
// single seeded permutation of train_hard move to train_easy. Fractions must
// lie in [0, 1] and be non-decreasing. The test side is copied unchanged.
std::vector<SplitManifest> ReinsertionSchedule(const SplitManifest& manifest,
                                               std::span<const double> fractions,
                                               uint64_t seed);

}  // namespace biasforge

#endif  // BIASFORGE_SPLITFORGE_H_
