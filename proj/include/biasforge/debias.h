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

#ifndef BIASFORGE_DEBIAS_H_
#define BIASFORGE_DEBIAS_H_

// Inputs for two debiasing baselines: per-example loss weights from a biased
// model's confidences, and the most-ambiguous training filter.

#include <filesystem>
#include <string>
#include <vector>

#include "biasforge/cartography.h"

namespace biasforge {

inline constexpr char kSelfDebiasFormula[] = "w = 1 - p_biased(gold)";

struct WeightedId {
  std::string id;
  double weight;
};

// Weight 1 - confidence per id, in table order. Throws DataError for a
// confidence outside [0, 1].
std::vector<WeightedId> SelfDebiasWeights(const ScoreTable& biased_confidence);

// floor(fraction * n) highest-variability ids, ties to the smaller id.
// fraction in (0, 1].
IdSet AmbiguousFilter(const ScoreTable& variability, double fraction);

// {"_meta": {"formula": ...}} header, then {"id": str, "weight": float}.
std::string SerializeWeights(const std::vector<WeightedId>& weights);
std::vector<WeightedId> ParseWeights(std::string_view text);
void WriteWeights(const std::vector<WeightedId>& weights,
                  const std::filesystem::path& path);
std::vector<WeightedId> LoadWeights(const std::filesystem::path& path);

}  // namespace biasforge

#endif  // BIASFORGE_DEBIAS_H_
