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

#include "test_util.h"

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <utility>

namespace biasforge::testing {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("biasforge-test-" + std::to_string(::getpid()) + "-" +
           std::to_string(counter.fetch_add(1)));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::vector<std::string> NumberedIds(size_t n, const std::string& prefix) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06zu", i);
    ids.push_back(prefix + buf);
  }
  return ids;
}

EmbeddingSet RandomEmbeddings(size_t n, size_t d, uint64_t seed, double scale,
                              const std::string& prefix) {
  Rng rng(seed);
  std::vector<float> values(n * d);
  for (float& v : values) v = static_cast<float>(scale * rng.Normal());
  return EmbeddingSet(NumberedIds(n, prefix), d, std::move(values));
}

EmbeddingSet TwoBlobs(size_t per_blob, size_t d, double separation,
                      double spread, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> values;
  values.reserve(2 * per_blob * d);
  for (size_t i = 0; i < 2 * per_blob; ++i) {
    for (size_t j = 0; j < d; ++j) {
      double v = spread * rng.Normal();
      if (j == 0 && i % 2 == 1) v += separation;
      values.push_back(static_cast<float>(v));
    }
  }
  return EmbeddingSet(NumberedIds(2 * per_blob), d, std::move(values));
}

std::vector<std::pair<std::set<size_t>, std::set<size_t>>> MergeLeafSets(
    const Dendrogram& dendrogram) {
  const size_t n = dendrogram.leaf_count();
  std::vector<std::set<size_t>> node(2 * n - 1);
  for (size_t i = 0; i < n; ++i) node[i] = {i};
  std::vector<std::pair<std::set<size_t>, std::set<size_t>>> out;
  for (size_t i = 0; i < dendrogram.merges().size(); ++i) {
    const Merge& m = dendrogram.merges()[i];
    out.emplace_back(node[m.left], node[m.right]);
    node[n + i] = node[m.left];
    node[n + i].insert(node[m.right].begin(), node[m.right].end());
  }
  return out;
}

InstanceTable LabelTable(
    const std::vector<std::pair<std::string, std::string>>& id_label) {
  std::vector<Instance> records;
  LabelSet labels;
  for (const auto& [id, label] : id_label) {
    records.push_back({id, label, {}});
    labels.insert(label);
  }
  return InstanceTable({}, labels, std::move(records));
}

ClusterAssignment MakeAssignment(std::vector<std::string> ids,
                                 std::vector<int> clusters, int k) {
  ClusterAssignment a;
  a.ids = std::move(ids);
  a.cluster_of = std::move(clusters);
  a.k = k;
  return a;
}

std::vector<std::vector<double>> ToRows(const EmbeddingSet& emb) {
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < emb.rows(); ++i) {
    auto r = emb.Row(i);
    rows.emplace_back(r.begin(), r.end());
  }
  return rows;
}

}  // namespace biasforge::testing
