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

#ifndef BIASFORGE_CARTOGRAPHY_H_
#define BIASFORGE_CARTOGRAPHY_H_

// Training-dynamics scores and quantile selection of hard-to-learn instances.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "biasforge/dataio.h"

namespace biasforge {

struct ScoredId {
  std::string id;
  double score;
};

class ScoreTable {
 public:
  // Validates unique ids and finite scores.
  ScoreTable(std::string metric_name, std::vector<ScoredId> entries);

  const std::string& metric_name() const { return metric_name_; }
  const std::vector<ScoredId>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  ScoreTable Restrict(const IdSet& ids) const;

 private:
  std::string metric_name_;
  std::vector<ScoredId> entries_;
};

// Mean gold-label probability over epochs.
ScoreTable Confidence(const DynamicsLog& log);
// Population standard deviation of the gold-label probability over epochs.
ScoreTable Variability(const DynamicsLog& log);

// ceil(q/100 * n) lowest-scoring ids; ties go to the lexicographically
// smaller id. q in [0, 100].
IdSet SelectHard(const ScoreTable& scores, double q_percent);
// Exactly `count` lowest-scoring ids under the same tie rule.
IdSet SelectHardCount(const ScoreTable& scores, size_t count);
// Count used by SelectHard for n scores.
size_t HardCountForPercent(size_t n, double q_percent);

// floor(fraction * n), treating products within a few ulps below an integer
// as that integer so decimal fractions such as 0.29 * 100 give 29.
size_t FloorFractionCount(size_t n, double fraction);

// Highest-scoring ids; ties to the lexicographically smaller id.
IdSet SelectTopCount(const ScoreTable& scores, size_t count);

// Scores file: one {"id": str, "score": float} per line.
std::string SerializeScores(const ScoreTable& scores);
ScoreTable ParseScores(std::string_view text, std::string metric_name = "score");
ScoreTable LoadScores(const std::filesystem::path& path,
                      std::string metric_name = "score");
void WriteScores(const ScoreTable& scores, const std::filesystem::path& path);

}  // namespace biasforge

#endif  // BIASFORGE_CARTOGRAPHY_H_
