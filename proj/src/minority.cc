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

#include "biasforge/minority.h"

#include <unordered_map>

#include "biasforge/errors.h"
#include "biasforge/nearest_neighbor.h"

namespace biasforge {

std::string_view MinorityModeName(MinorityMode mode) {
  return mode == MinorityMode::kAllButMajority ? "all_but_majority"
                                               : "least_label";
}

MinorityMode ParseMinorityMode(std::string_view name) {
  if (name == "all_but_majority" || name == "all-but-majority") {
    return MinorityMode::kAllButMajority;
  }
  if (name == "least_label" || name == "least-label") {
    return MinorityMode::kLeastLabel;
  }
  throw UsageError("unknown minority mode '" + std::string(name) + "'");
}

const ClusterMajority& MajorityMap::At(int cluster) const {
  auto it = clusters.find(cluster);
  if (it == clusters.end()) {
    throw DataError("majority map has no entry for cluster " +
                    std::to_string(cluster));
  }
  return it->second;
}

namespace {

ClusterMajority Summarize(std::map<std::string, size_t> counts,
                          MinorityMode mode) {
  ClusterMajority out;
  // std::map iterates labels in lexicographic order, so strict comparisons
  // keep the smallest label among ties.
  size_t best = 0;
  for (const auto& [label, count] : counts) {
    if (count > best) {
      best = count;
      out.majority = label;
    }
  }
  if (mode == MinorityMode::kAllButMajority) {
    for (const auto& [label, count] : counts) {
      if (label != out.majority) out.minority.insert(label);
    }
  } else if (counts.size() > 1) {
    // The majority is never a candidate, which only matters when every
    // present label ties.
    size_t least = 0;
    std::string least_label;
    for (const auto& [label, count] : counts) {
      if (label == out.majority) continue;
      if (least_label.empty() || count < least) {
        least = count;
        least_label = label;
      }
    }
    out.minority.insert(least_label);
  }
  out.counts = std::move(counts);
  return out;
}

}  // namespace

MajorityMap MajorityLabels(const ClusterAssignment& assign,
                           const InstanceTable& table, MinorityMode mode) {
  assign.Validate();
  std::map<int, std::map<std::string, size_t>> counts;
  for (size_t i = 0; i < assign.ids.size(); ++i) {
    const Instance* rec = table.Find(assign.ids[i]);
    if (rec == nullptr) {
      throw DataError("clustered id '" + assign.ids[i] +
                      "' has no label in the instance table");
    }
    ++counts[assign.cluster_of[i]][rec->label];
  }
  MajorityMap out;
  out.mode = mode;
  for (auto& [cluster, c] : counts) {
    out.clusters.emplace(cluster, Summarize(std::move(c), mode));
  }
  return out;
}

IdSet TrainMinority(const ClusterAssignment& assign, const InstanceTable& table,
                    const MajorityMap& majority) {
  IdSet hard;
  for (size_t i = 0; i < assign.ids.size(); ++i) {
    const std::string& label = table.LabelOf(assign.ids[i]);
    if (majority.At(assign.cluster_of[i]).minority.contains(label)) {
      hard.insert(assign.ids[i]);
    }
  }
  return hard;
}

IdSet TrainMinority(const ClusterAssignment& assign, const InstanceTable& table,
                    MinorityMode mode) {
  return TrainMinority(assign, table, MajorityLabels(assign, table, mode));
}

ClusterAssignment AssignTest(const EmbeddingSet& test_emb,
                             const EmbeddingSet& train_emb,
                             const ClusterAssignment& train_assign) {
  std::unordered_map<std::string_view, int> cluster_of;
  cluster_of.reserve(train_assign.ids.size());
  for (size_t i = 0; i < train_assign.ids.size(); ++i) {
    cluster_of.emplace(train_assign.ids[i], train_assign.cluster_of[i]);
  }
  std::vector<int> row_cluster(train_emb.rows());
  for (size_t r = 0; r < train_emb.rows(); ++r) {
    auto it = cluster_of.find(train_emb.ids()[r]);
    if (it == cluster_of.end()) {
      throw DataError("training embedding id '" + train_emb.ids()[r] +
                      "' is missing from the cluster assignment");
    }
    row_cluster[r] = it->second;
  }
  const std::vector<size_t> nearest = NearestNeighbors(test_emb, train_emb);
  ClusterAssignment out;
  out.ids = test_emb.ids();
  out.k = train_assign.k;
  out.provenance = train_assign.provenance;
  out.provenance.algorithm = "nearest-neighbor-transfer";
  out.cluster_of.reserve(nearest.size());
  for (size_t row : nearest) out.cluster_of.push_back(row_cluster[row]);
  return out;
}

IdSet TestMinority(const ClusterAssignment& test_assign,
                   const InstanceTable& test_table, const MajorityMap& majority,
                   MinorityMode mode) {
  IdSet hard;
  for (size_t i = 0; i < test_assign.ids.size(); ++i) {
    const std::string& label = test_table.LabelOf(test_assign.ids[i]);
    const ClusterMajority& c = majority.At(test_assign.cluster_of[i]);
    bool is_hard;
    if (mode == MinorityMode::kAllButMajority) {
      is_hard = label != c.majority;
    } else {
      // Recompute from counts so the test-side mode may differ from the one
      // the map was built with.
      is_hard = Summarize(c.counts, MinorityMode::kLeastLabel)
                    .minority.contains(label);
    }
    if (is_hard) hard.insert(test_assign.ids[i]);
  }
  return hard;
}

std::string SerializeMajorityMap(const MajorityMap& map) {
  Json clusters = Json::array();
  for (const auto& [index, c] : map.clusters) {
    clusters.push_back({{"cluster", index},
                        {"majority", c.majority},
                        {"counts", c.counts},
                        {"minority", c.minority}});
  }
  return Json{{"mode", MinorityModeName(map.mode)}, {"clusters", clusters}}
             .dump() +
         "\n";
}

MajorityMap ParseMajorityMap(std::string_view text) {
  MajorityMap out;
  try {
    const Json doc = Json::parse(text);
    out.mode = ParseMinorityMode(doc.at("mode").get<std::string>());
    for (const Json& c : doc.at("clusters")) {
      ClusterMajority m;
      m.majority = c.at("majority").get<std::string>();
      m.counts = c.at("counts").get<std::map<std::string, size_t>>();
      m.minority = c.at("minority").get<LabelSet>();
      if (!out.clusters.emplace(c.at("cluster").get<int>(), std::move(m)).second) {
        throw DataError("majority map: duplicate cluster entry");
      }
    }
  } catch (const Json::exception& e) {
    throw DataError(std::string("majority map: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("majority map: ") + e.what());
  }
  for (const auto& [index, c] : out.clusters) {
    if (c.minority.contains(c.majority) || !c.counts.contains(c.majority)) {
      throw DataError("majority map: inconsistent entry for cluster " +
                      std::to_string(index));
    }
  }
  return out;
}

void WriteMajorityMap(const MajorityMap& map, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeMajorityMap(map));
}

MajorityMap LoadMajorityMap(const std::filesystem::path& path) {
  return ParseMajorityMap(ReadFile(path));
}

}  // namespace biasforge
