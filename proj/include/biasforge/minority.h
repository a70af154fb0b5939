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

#ifndef BIASFORGE_MINORITY_H_
#define BIASFORGE_MINORITY_H_

// Per-cluster majority labels, minority (hard) training instances, and the
// nearest-neighbor transfer of cluster membership to test instances.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "biasforge/cluster.h"
#include "biasforge/dataio.h"

namespace biasforge {

enum class MinorityMode {
  // Every label present in the cluster other than the majority.
  kAllButMajority,
  // Only the least frequent present label.
  kLeastLabel,
};

// "all_but_majority" / "least_label".
std::string_view MinorityModeName(MinorityMode mode);
// Accepts the names above and their hyphenated spellings.
MinorityMode ParseMinorityMode(std::string_view name);

struct ClusterMajority {
  std::string majority;
  std::map<std::string, size_t> counts;
  LabelSet minority;

  friend bool operator==(const ClusterMajority&,
                         const ClusterMajority&) = default;
};

struct MajorityMap {
  MinorityMode mode = MinorityMode::kAllButMajority;
  // Non-empty clusters only.
  std::map<int, ClusterMajority> clusters;

  // Throws DataError for a cluster with no members.
  const ClusterMajority& At(int cluster) const;

  friend bool operator==(const MajorityMap&, const MajorityMap&) = default;
};

// Majority = highest count, ties to the lexicographically smallest label.
// Throws DataError when an assigned id is missing from the table.
MajorityMap MajorityLabels(const ClusterAssignment& assign,
                           const InstanceTable& table, MinorityMode mode);

// Ids whose label is a minority label of their cluster.
IdSet TrainMinority(const ClusterAssignment& assign, const InstanceTable& table,
                    MinorityMode mode);
IdSet TrainMinority(const ClusterAssignment& assign, const InstanceTable& table,
                    const MajorityMap& majority);

// Each test row takes the cluster of its exact Euclidean nearest training
// row (ties to the smaller training row). Every training row id must appear
// in `train_assign`.
ClusterAssignment AssignTest(const EmbeddingSet& test_emb,
                             const EmbeddingSet& train_emb,
                             const ClusterAssignment& train_assign);

// Hard test ids. kAllButMajority: label differs from the cluster majority.
// kLeastLabel: label is the cluster's least label.
IdSet TestMinority(const ClusterAssignment& test_assign,
                   const InstanceTable& test_table, const MajorityMap& majority,
                   MinorityMode mode);

// {"mode": str, "clusters": [{"cluster", "majority", "counts", "minority"}]}
std::string SerializeMajorityMap(const MajorityMap& map);
MajorityMap ParseMajorityMap(std::string_view text);
void WriteMajorityMap(const MajorityMap& map, const std::filesystem::path& path);
MajorityMap LoadMajorityMap(const std::filesystem::path& path);

}  // namespace biasforge

#endif  // BIASFORGE_MINORITY_H_
