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

#ifndef BIASFORGE_DATAIO_H_
#define BIASFORGE_DATAIO_H_

// File formats and validated in-memory containers for every artifact the
// toolkit exchanges: labeled instances, per-epoch gold-probability logs,
// embedding matrices, split manifests and prediction files.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"

namespace biasforge {

using IdSet = std::set<std::string>;
using LabelSet = std::set<std::string>;
using Json = nlohmann::json;

// A text field or a numeric feature vector.
using FieldValue = std::variant<std::string, std::vector<double>>;

struct Instance {
  std::string id;
  std::string label;
  // Parallel to InstanceTable::field_names().
  std::vector<FieldValue> fields;
};

class InstanceTable {
 public:
  // Validates: ids unique, every label in `labels`, every record carries
  // exactly one value per field name. Throws DataError.
  InstanceTable(std::vector<std::string> field_names, LabelSet labels,
                std::vector<Instance> records);

  const std::vector<Instance>& records() const { return records_; }
  const std::vector<std::string>& field_names() const { return field_names_; }
  const LabelSet& labels() const { return labels_; }
  size_t size() const { return records_.size(); }

  const Instance* Find(std::string_view id) const;
  // Throws DataError when the id is unknown.
  const std::string& LabelOf(std::string_view id) const;
  std::optional<size_t> FieldIndex(std::string_view name) const;
  IdSet Ids() const;
  // Ids in file order.
  std::vector<std::string> OrderedIds() const;

 private:
  std::vector<std::string> field_names_;
  LabelSet labels_;
  std::vector<Instance> records_;
  std::unordered_map<std::string, size_t> index_;
};

struct DynamicsRecord {
  std::string id;
  std::string gold;
  // Gold-label probability at the end of each epoch.
  std::vector<double> epochs;
};

class DynamicsLog {
 public:
  // Validates uniform epoch count >= 1, probabilities in [0, 1], unique ids,
  // and (when `labels` is given) gold labels drawn from it.
  explicit DynamicsLog(std::vector<DynamicsRecord> records,
                       const LabelSet* labels = nullptr);

  const std::vector<DynamicsRecord>& records() const { return records_; }
  size_t size() const { return records_.size(); }
  size_t epoch_count() const { return epoch_count_; }

  // Log restricted to the given ids (file order kept). Unknown ids error.
  DynamicsLog Restrict(const IdSet& ids) const;

 private:
  std::vector<DynamicsRecord> records_;
  size_t epoch_count_ = 0;
};

// Row-major n x d matrix of 32-bit floats with one id per row.
class EmbeddingSet {
 public:
  EmbeddingSet(std::vector<std::string> ids, size_t dim,
               std::vector<float> values);

  size_t rows() const { return ids_.size(); }
  size_t dim() const { return dim_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const float> Row(size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const float> values() const { return values_; }
  // Subset of rows, in the order given.
  EmbeddingSet Select(std::span<const size_t> rows) const;
  std::optional<size_t> RowOf(std::string_view id) const;

 private:
  std::vector<std::string> ids_;
  size_t dim_;
  std::vector<float> values_;
  std::unordered_map<std::string, size_t> index_;
};

inline constexpr int kManifestSchemaVersion = 1;

enum class SplitMethod { kCartography, kPartialInput, kMinority, kRandom, kCustom };

std::string_view SplitMethodName(SplitMethod method);
SplitMethod ParseSplitMethod(std::string_view name);

struct SplitManifest {
  int schema_version = kManifestSchemaVersion;
  SplitMethod method = SplitMethod::kCustom;
  Json params = Json::object();
  std::string dataset_id;
  std::map<std::string, std::string> input_digests;
  IdSet train_easy;
  IdSet train_hard;
  IdSet test_easy;
  IdSet test_hard;
  std::vector<std::string> warnings;

  IdSet TrainIds() const;
  IdSet TestIds() const;
  // Throws DataError when an easy/hard pair overlaps.
  void Validate() const;

  friend bool operator==(const SplitManifest&, const SplitManifest&) = default;
};

struct Prediction {
  std::string id;
  std::string pred;
};

class PredictionFile {
 public:
  explicit PredictionFile(std::vector<Prediction> records);
  const std::vector<Prediction>& records() const { return records_; }
  // nullptr when absent.
  const std::string* Find(std::string_view id) const;

 private:
  std::vector<Prediction> records_;
  std::unordered_map<std::string, size_t> index_;
};

// --- Instances ---------------------------------------------------------
InstanceTable ParseInstances(std::string_view text);
InstanceTable LoadInstances(const std::filesystem::path& path);
// Always emits the `_schema` header line, then one record per line.
std::string SerializeInstances(const InstanceTable& table);
void WriteInstances(const InstanceTable& table,
                    const std::filesystem::path& path);

// Keeps only `keep_fields`, in the given order. Ids and labels unchanged.
InstanceTable ProjectPartialInput(const InstanceTable& table,
                                  std::span<const std::string> keep_fields);

// --- Dynamics ------------------------------------------------------------
DynamicsLog ParseDynamics(std::string_view text,
                          const LabelSet* labels = nullptr);
DynamicsLog LoadDynamics(const std::filesystem::path& path,
                         const LabelSet* labels = nullptr);
std::string SerializeDynamics(const DynamicsLog& log);
void WriteDynamics(const DynamicsLog& log, const std::filesystem::path& path);

// --- Embeddings ----------------------------------------------------------
// Binary layout: "BAE1", u32 version = 1, u64 n, u32 d, u8 dtype (1 = f32),
// 7 zero bytes, then n*d little-endian floats row-major.
inline constexpr size_t kEmbeddingHeaderBytes = 28;

std::string EncodeEmbeddingMatrix(const EmbeddingSet& set);
EmbeddingSet DecodeEmbeddings(std::string_view blob,
                              std::vector<std::string> ids);
EmbeddingSet LoadEmbeddings(const std::filesystem::path& matrix_path,
                            const std::filesystem::path& ids_path);
// `<matrix_path>.ids` when no sidecar path is given.
EmbeddingSet LoadEmbeddings(const std::filesystem::path& matrix_path);
void WriteEmbeddings(const EmbeddingSet& set,
                     const std::filesystem::path& matrix_path,
                     const std::filesystem::path& ids_path);
void WriteEmbeddings(const EmbeddingSet& set,
                     const std::filesystem::path& matrix_path);
std::filesystem::path DefaultIdsPath(const std::filesystem::path& matrix_path);

// --- Manifests -----------------------------------------------------------
// Canonical form: sorted keys, sorted id lists, no insignificant whitespace.
std::string SerializeManifest(const SplitManifest& manifest);
SplitManifest ParseManifest(std::string_view text);
void WriteManifest(const SplitManifest& manifest,
                   const std::filesystem::path& path);
SplitManifest ReadManifest(const std::filesystem::path& path);

// --- Predictions ---------------------------------------------------------
PredictionFile ParsePredictions(std::string_view text);
PredictionFile LoadPredictions(const std::filesystem::path& path);
std::string SerializePredictions(const PredictionFile& preds);
void WritePredictions(const PredictionFile& preds,
                      const std::filesystem::path& path);

// --- Id lists (one id per line, sorted) ----------------------------------
std::string SerializeIdList(const IdSet& ids);
IdSet ParseIdList(std::string_view text);
IdSet LoadIdList(const std::filesystem::path& path);
void WriteIdList(const IdSet& ids, const std::filesystem::path& path);

// --- Files and digests ---------------------------------------------------
std::string ReadFile(const std::filesystem::path& path);
// Writes to a temporary sibling and renames it into place.
void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view content);
// "sha256:<hex>" of the bytes.
std::string ContentDigest(std::string_view bytes);
std::string FileDigest(const std::filesystem::path& path);

}  // namespace biasforge

#endif  // BIASFORGE_DATAIO_H_
