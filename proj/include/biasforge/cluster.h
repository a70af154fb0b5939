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

#ifndef BIASFORGE_CLUSTER_H_
#define BIASFORGE_CLUSTER_H_

// Ward hierarchical clustering, flat cuts, and the sample-then-assign path
// for training sets too large to cluster exactly.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biasforge/dataio.h"

namespace biasforge {

struct Merge {
  // Node ids: leaves are 0..n-1, the node created by merge i is n+i.
  size_t left;
  size_t right;
  // Ward distance sqrt(2 |A||B| / (|A|+|B|)) * ||mean(A) - mean(B)||, which
  // equals the Lance-Williams Ward recurrence seeded with Euclidean distances.
  double height;
  size_t size;

  friend bool operator==(const Merge&, const Merge&) = default;
};

class Dendrogram {
 public:
  // Validates n-1 merges, non-decreasing heights and that every node is used
  // as a child at most once.
  Dendrogram(size_t leaf_count, std::vector<Merge> merges);

  size_t leaf_count() const { return leaf_count_; }
  const std::vector<Merge>& merges() const { return merges_; }

 private:
  size_t leaf_count_;
  std::vector<Merge> merges_;
};

// Nearest-neighbor-chain Ward linkage over the rows of `emb`. O(n^2 d) time,
// O(n d) memory. Deterministic; nearest-neighbor ties prefer the predecessor
// on the chain, then the smallest node id.
Dendrogram WardLinkage(const EmbeddingSet& emb);

struct ClusterProvenance {
  std::string algorithm = "ward";
  uint64_t seed = 0;
  bool sampled = false;
  double sample_fraction = 1.0;

  friend bool operator==(const ClusterProvenance&,
                         const ClusterProvenance&) = default;
};

struct ClusterAssignment {
  std::vector<std::string> ids;
  // Parallel to ids, each in [0, k).
  std::vector<int> cluster_of;
  int k = 0;
  ClusterProvenance provenance;

  // Throws DataError for an unknown id.
  int ClusterOf(std::string_view id) const;
  void Validate() const;

  friend bool operator==(const ClusterAssignment&,
                         const ClusterAssignment&) = default;
};

// Pseudo-labels share the assignment representation: label = cluster index.
using PseudoLabelFile = ClusterAssignment;

// Applies the first n-k merges. Cluster indices rank clusters by their
// smallest leaf index.
std::vector<int> CutLabels(const Dendrogram& dendrogram, size_t k);
ClusterAssignment Cut(const Dendrogram& dendrogram, size_t k,
                      std::vector<std::string> ids);

struct ScalingOptions {
  double sample_fraction = 0.5;
  size_t threshold_n = 100000;
  uint64_t seed = 0;
};

// Exact Ward cut when n <= threshold_n; otherwise Ward on a seeded uniform
// sample of floor(fraction * n) rows, with every other row taking the cluster
// of its nearest sampled row.
ClusterAssignment ClusterScaled(const EmbeddingSet& emb, size_t k,
                                const ScalingOptions& options);

// Pseudo-label i = cluster index of ClusterScaled at k = m.
PseudoLabelFile ExportPseudoLabels(const EmbeddingSet& emb, size_t m,
                                   const ScalingOptions& options);

// Line-delimited {"id": str, "cluster": int}, preceded by a
// {"_provenance": {...}} header line.
std::string SerializeAssignment(const ClusterAssignment& assignment);
ClusterAssignment ParseAssignment(std::string_view text);
ClusterAssignment LoadAssignment(const std::filesystem::path& path);
void WriteAssignment(const ClusterAssignment& assignment,
                     const std::filesystem::path& path);

}  // namespace biasforge

#endif  // BIASFORGE_CLUSTER_H_
