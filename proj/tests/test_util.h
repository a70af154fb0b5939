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

#ifndef BIASFORGE_TESTS_TEST_UTIL_H_
#define BIASFORGE_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "biasforge/cluster.h"
#include "biasforge/dataio.h"
#include "biasforge/random.h"

namespace biasforge::testing {

// Fresh, empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// "p0000", "p0001", ...
std::vector<std::string> NumberedIds(size_t n, const std::string& prefix = "p");

// Rows drawn from N(0, scale^2) with the library's portable Rng.
EmbeddingSet RandomEmbeddings(size_t n, size_t d, uint64_t seed,
                              double scale = 1.0,
                              const std::string& prefix = "p");

// Two Gaussian blobs of `per_blob` points each, centers `separation` apart
// along the first axis. Rows alternate blob 0, blob 1, so membership is the
// row parity.
EmbeddingSet TwoBlobs(size_t per_blob, size_t d, double separation,
                      double spread, uint64_t seed);

// Leaf sets of every merge in order, for comparing dendrograms.
std::vector<std::pair<std::set<size_t>, std::set<size_t>>> MergeLeafSets(
    const Dendrogram& dendrogram);

// Table with no fields; labels inferred from the records.
InstanceTable LabelTable(
    const std::vector<std::pair<std::string, std::string>>& id_label);

ClusterAssignment MakeAssignment(std::vector<std::string> ids,
                                 std::vector<int> clusters, int k);

// Plain-vector copy of an embedding matrix in double precision.
std::vector<std::vector<double>> ToRows(const EmbeddingSet& emb);

}  // namespace biasforge::testing

#endif  // BIASFORGE_TESTS_TEST_UTIL_H_
