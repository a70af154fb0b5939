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

#include "biasforge/dataio.h"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "biasforge/errors.h"
#include "jsonl.h"

namespace biasforge {

using internal::ForEachJsonLine;
using internal::LineError;
using internal::StringMember;

// --- InstanceTable ---------------------------------------------------------

InstanceTable::InstanceTable(std::vector<std::string> field_names,
                             LabelSet labels, std::vector<Instance> records)
    : field_names_(std::move(field_names)),
      labels_(std::move(labels)),
      records_(std::move(records)) {
  if (labels_.empty()) throw DataError("instances: empty label set");
  {
    std::set<std::string> seen;
    for (const auto& name : field_names_) {
      if (!seen.insert(name).second) {
        throw DataError("instances: duplicate field name '" + name + "'");
      }
    }
  }
  index_.reserve(records_.size());
  for (size_t i = 0; i < records_.size(); ++i) {
    const Instance& rec = records_[i];
    if (!index_.emplace(rec.id, i).second) {
      throw DataError("instances: duplicate id '" + rec.id + "'");
    }
    if (!labels_.contains(rec.label)) {
      throw DataError("instances: id '" + rec.id + "' has label '" +
                      rec.label + "' outside the label set");
    }
    if (rec.fields.size() != field_names_.size()) {
      throw DataError("instances: id '" + rec.id +
                      "' does not match the field schema");
    }
  }
}

const Instance* InstanceTable::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

const std::string& InstanceTable::LabelOf(std::string_view id) const {
  const Instance* rec = Find(id);
  if (rec == nullptr) {
    throw DataError("no instance with id '" + std::string(id) + "'");
  }
  return rec->label;
}

std::optional<size_t> InstanceTable::FieldIndex(std::string_view name) const {
  auto it = std::find(field_names_.begin(), field_names_.end(), name);
  if (it == field_names_.end()) return std::nullopt;
  return static_cast<size_t>(it - field_names_.begin());
}

IdSet InstanceTable::Ids() const {
  IdSet ids;
  for (const auto& rec : records_) ids.insert(rec.id);
  return ids;
}

std::vector<std::string> InstanceTable::OrderedIds() const {
  std::vector<std::string> ids;
  ids.reserve(records_.size());
  for (const auto& rec : records_) ids.push_back(rec.id);
  return ids;
}

// --- DynamicsLog -----------------------------------------------------------

DynamicsLog::DynamicsLog(std::vector<DynamicsRecord> records,
                         const LabelSet* labels)
    : records_(std::move(records)) {
  std::set<std::string_view> seen;
  for (const auto& rec : records_) {
    if (!seen.insert(rec.id).second) {
      throw DataError("dynamics: duplicate id '" + rec.id + "'");
    }
    if (rec.epochs.empty()) {
      throw DataError("dynamics: id '" + rec.id + "' has no epochs");
    }
    if (epoch_count_ == 0) epoch_count_ = rec.epochs.size();
    if (rec.epochs.size() != epoch_count_) {
      throw DataError("dynamics: ragged epoch lists (id '" + rec.id + "' has " +
                      std::to_string(rec.epochs.size()) + ", expected " +
                      std::to_string(epoch_count_) + ")");
    }
    for (double p : rec.epochs) {
      if (!(p >= 0.0 && p <= 1.0)) {
        std::ostringstream msg;
        msg << "dynamics: id '" << rec.id << "' has probability " << p
            << " outside [0, 1]";
        throw DataError(msg.str());
      }
    }
    if (labels != nullptr && !labels->contains(rec.gold)) {
      throw DataError("dynamics: id '" + rec.id + "' has unknown gold label '" +
                      rec.gold + "'");
    }
  }
}

DynamicsLog DynamicsLog::Restrict(const IdSet& ids) const {
  std::vector<DynamicsRecord> kept;
  size_t found = 0;
  for (const auto& rec : records_) {
    if (ids.contains(rec.id)) {
      kept.push_back(rec);
      ++found;
    }
  }
  if (found != ids.size()) {
    throw DataError("dynamics: restriction names ids absent from the log");
  }
  return DynamicsLog(std::move(kept));
}

// --- EmbeddingSet ----------------------------------------------------------

EmbeddingSet::EmbeddingSet(std::vector<std::string> ids, size_t dim,
                           std::vector<float> values)
    : ids_(std::move(ids)), dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) throw DataError("embeddings: dimensionality must be >= 1");
  if (values_.size() != ids_.size() * dim_) {
    throw DataError("embeddings: matrix size does not match n*d");
  }
  for (size_t i = 0; i < ids_.size(); ++i) {
    for (float v : Row(i)) {
      if (!std::isfinite(v)) {
        throw DataError("embeddings: non-finite value in row " +
                        std::to_string(i) + " ('" + ids_[i] + "')");
      }
    }
  }
  index_.reserve(ids_.size());
  for (size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw DataError("embeddings: duplicate id '" + ids_[i] + "'");
    }
  }
}

EmbeddingSet EmbeddingSet::Select(std::span<const size_t> rows) const {
  std::vector<std::string> ids;
  std::vector<float> values;
  ids.reserve(rows.size());
  values.reserve(rows.size() * dim_);
  for (size_t r : rows) {
    ids.push_back(ids_.at(r));
    auto row = Row(r);
    values.insert(values.end(), row.begin(), row.end());
  }
  return EmbeddingSet(std::move(ids), dim_, std::move(values));
}

std::optional<size_t> EmbeddingSet::RowOf(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// --- SplitManifest ---------------------------------------------------------

namespace {

constexpr std::array<std::pair<SplitMethod, std::string_view>, 5> kMethodNames{{
    {SplitMethod::kCartography, "cartography"},
    {SplitMethod::kPartialInput, "partial_input"},
    {SplitMethod::kMinority, "minority"},
    {SplitMethod::kRandom, "random"},
    {SplitMethod::kCustom, "custom"},
}};

bool Intersects(const IdSet& a, const IdSet& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return true;
    }
  }
  return false;
}

}  // namespace

std::string_view SplitMethodName(SplitMethod method) {
  for (const auto& [m, name] : kMethodNames) {
    if (m == method) return name;
  }
  return "custom";
}

SplitMethod ParseSplitMethod(std::string_view name) {
  for (const auto& [m, n] : kMethodNames) {
    if (n == name) return m;
  }
  throw DataError("unknown split method '" + std::string(name) + "'");
}

IdSet SplitManifest::TrainIds() const {
  IdSet ids = train_easy;
  ids.insert(train_hard.begin(), train_hard.end());
  return ids;
}

IdSet SplitManifest::TestIds() const {
  IdSet ids = test_easy;
  ids.insert(test_hard.begin(), test_hard.end());
  return ids;
}

void SplitManifest::Validate() const {
  if (schema_version != kManifestSchemaVersion) {
    throw DataError("manifest: unsupported schema version " +
                    std::to_string(schema_version));
  }
  if (Intersects(train_easy, train_hard)) {
    throw DataError("manifest: train_easy and train_hard overlap");
  }
  if (Intersects(test_easy, test_hard)) {
    throw DataError("manifest: test_easy and test_hard overlap");
  }
  if (!params.is_object()) throw DataError("manifest: params must be an object");
}

// --- PredictionFile --------------------------------------------------------

PredictionFile::PredictionFile(std::vector<Prediction> records)
    : records_(std::move(records)) {
  index_.reserve(records_.size());
  for (size_t i = 0; i < records_.size(); ++i) {
    if (!index_.emplace(records_[i].id, i).second) {
      throw DataError("predictions: duplicate id '" + records_[i].id + "'");
    }
  }
}

const std::string* PredictionFile::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &records_[it->second].pred;
}

// --- Instances I/O ---------------------------------------------------------

namespace {

FieldValue ParseFieldValue(const Json& value, size_t line_no,
                           const std::string& name) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_array()) {
    std::vector<double> numbers;
    numbers.reserve(value.size());
    for (const auto& v : value) {
      if (!v.is_number()) {
        LineError("instances", line_no,
                  "field '" + name + "' mixes numbers and non-numbers");
      }
      numbers.push_back(v.get<double>());
    }
    return numbers;
  }
  LineError("instances", line_no,
            "field '" + name + "' must be a string or a number list");
}

Json FieldValueJson(const FieldValue& value) {
  if (const auto* text = std::get_if<std::string>(&value)) return *text;
  return std::get<std::vector<double>>(value);
}

}  // namespace

InstanceTable ParseInstances(std::string_view text) {
  std::optional<LabelSet> declared_labels;
  std::optional<std::vector<std::string>> declared_fields;
  struct Pending {
    Instance instance;
    std::map<std::string, FieldValue> fields;
    size_t line_no;
  };
  std::vector<Pending> pending;
  bool first = true;
  ForEachJsonLine(text, "instances", [&](const Json& rec, size_t line_no) {
    if (first && rec.contains("_schema")) {
      first = false;
      const Json& schema = rec["_schema"];
      if (!schema.is_object()) LineError("instances", line_no, "bad _schema");
      if (schema.contains("labels")) {
        LabelSet labels;
        for (const auto& l : schema["labels"]) {
          if (!l.is_string()) LineError("instances", line_no, "bad label");
          labels.insert(l.get<std::string>());
        }
        declared_labels = std::move(labels);
      }
      if (schema.contains("fields")) {
        std::vector<std::string> fields;
        for (const auto& f : schema["fields"]) {
          if (!f.is_string()) LineError("instances", line_no, "bad field name");
          fields.push_back(f.get<std::string>());
        }
        declared_fields = std::move(fields);
      }
      return;
    }
    first = false;
    Pending p;
    p.line_no = line_no;
    p.instance.id = StringMember(rec, "id", "instances", line_no);
    p.instance.label = StringMember(rec, "label", "instances", line_no);
    if (auto it = rec.find("fields"); it != rec.end()) {
      if (!it->is_object()) LineError("instances", line_no, "fields must be an object");
      for (const auto& [name, value] : it->items()) {
        p.fields.emplace(name, ParseFieldValue(value, line_no, name));
      }
    }
    pending.push_back(std::move(p));
  });
  if (pending.empty()) throw DataError("instances: empty file");

  std::vector<std::string> field_names;
  if (declared_fields) {
    field_names = *declared_fields;
  } else {
    for (const auto& [name, _] : pending.front().fields) field_names.push_back(name);
  }
  LabelSet labels;
  if (declared_labels) {
    labels = *declared_labels;
  } else {
    for (const auto& p : pending) labels.insert(p.instance.label);
  }

  std::vector<Instance> records;
  records.reserve(pending.size());
  std::set<std::string> seen;
  for (auto& p : pending) {
    if (!seen.insert(p.instance.id).second) {
      LineError("instances", p.line_no, "duplicate id '" + p.instance.id + "'");
    }
    if (!labels.contains(p.instance.label)) {
      LineError("instances", p.line_no,
                "label '" + p.instance.label + "' not in the declared label set");
    }
    if (p.fields.size() != field_names.size()) {
      LineError("instances", p.line_no, "record fields do not match the schema");
    }
    for (const auto& name : field_names) {
      auto it = p.fields.find(name);
      if (it == p.fields.end()) {
        LineError("instances", p.line_no, "missing field '" + name + "'");
      }
      p.instance.fields.push_back(std::move(it->second));
    }
    records.push_back(std::move(p.instance));
  }
  return InstanceTable(std::move(field_names), std::move(labels),
                       std::move(records));
}

InstanceTable LoadInstances(const std::filesystem::path& path) {
  return ParseInstances(ReadFile(path));
}

std::string SerializeInstances(const InstanceTable& table) {
  std::string out;
  Json header = {{"_schema",
                  {{"labels", table.labels()}, {"fields", table.field_names()}}}};
  out += header.dump();
  out += '\n';
  for (const auto& rec : table.records()) {
    Json fields = Json::object();
    for (size_t f = 0; f < rec.fields.size(); ++f) {
      fields[table.field_names()[f]] = FieldValueJson(rec.fields[f]);
    }
    Json line = {{"id", rec.id}, {"label", rec.label}, {"fields", fields}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

void WriteInstances(const InstanceTable& table,
                    const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeInstances(table));
}

InstanceTable ProjectPartialInput(const InstanceTable& table,
                                  std::span<const std::string> keep_fields) {
  std::vector<size_t> columns;
  for (const auto& name : keep_fields) {
    auto idx = table.FieldIndex(name);
    if (!idx) throw DataError("unknown field '" + name + "'");
    columns.push_back(*idx);
  }
  std::vector<Instance> records;
  records.reserve(table.size());
  for (const auto& rec : table.records()) {
    Instance projected{rec.id, rec.label, {}};
    for (size_t c : columns) projected.fields.push_back(rec.fields[c]);
    records.push_back(std::move(projected));
  }
  return InstanceTable(std::vector<std::string>(keep_fields.begin(),
                                                keep_fields.end()),
                       table.labels(), std::move(records));
}

// --- Dynamics I/O ----------------------------------------------------------

DynamicsLog ParseDynamics(std::string_view text, const LabelSet* labels) {
  std::vector<DynamicsRecord> records;
  ForEachJsonLine(text, "dynamics", [&](const Json& rec, size_t line_no) {
    DynamicsRecord r;
    r.id = StringMember(rec, "id", "dynamics", line_no);
    r.gold = StringMember(rec, "gold", "dynamics", line_no);
    auto it = rec.find("epochs");
    if (it == rec.end() || !it->is_array()) {
      LineError("dynamics", line_no, "missing epochs list");
    }
    for (const auto& p : *it) {
      if (!p.is_number()) LineError("dynamics", line_no, "non-numeric probability");
      r.epochs.push_back(p.get<double>());
    }
    records.push_back(std::move(r));
  });
  return DynamicsLog(std::move(records), labels);
}

DynamicsLog LoadDynamics(const std::filesystem::path& path,
                         const LabelSet* labels) {
  return ParseDynamics(ReadFile(path), labels);
}

std::string SerializeDynamics(const DynamicsLog& log) {
  std::string out;
  for (const auto& rec : log.records()) {
    Json line = {{"id", rec.id}, {"gold", rec.gold}, {"epochs", rec.epochs}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

void WriteDynamics(const DynamicsLog& log, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeDynamics(log));
}

// --- Embeddings I/O --------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'B', 'A', 'E', '1'};
constexpr uint32_t kEmbeddingVersion = 1;
constexpr uint8_t kDtypeF32 = 1;

template <typename T>
void PutLe(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  U bits = static_cast<U>(value);
  for (size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T GetLe(std::string_view blob, size_t offset) {
  T value = 0;
  for (size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<uint8_t>(blob[offset + i])) << (8 * i);
  }
  return value;
}

}  // namespace

std::string EncodeEmbeddingMatrix(const EmbeddingSet& set) {
  std::string out;
  out.reserve(kEmbeddingHeaderBytes + set.values().size() * 4);
  out.append(kMagic, 4);
  PutLe<uint32_t>(out, kEmbeddingVersion);
  PutLe<uint64_t>(out, set.rows());
  PutLe<uint32_t>(out, static_cast<uint32_t>(set.dim()));
  out.push_back(static_cast<char>(kDtypeF32));
  out.append(7, '\0');
  for (float v : set.values()) PutLe<uint32_t>(out, std::bit_cast<uint32_t>(v));
  return out;
}

EmbeddingSet DecodeEmbeddings(std::string_view blob,
                              std::vector<std::string> ids) {
  if (blob.size() < kEmbeddingHeaderBytes) {
    throw DataError("embeddings: file shorter than the header");
  }
  if (std::memcmp(blob.data(), kMagic, 4) != 0) {
    throw DataError("embeddings: bad magic (expected BAE1)");
  }
  const auto version = GetLe<uint32_t>(blob, 4);
  if (version != kEmbeddingVersion) {
    throw DataError("embeddings: unsupported version " + std::to_string(version));
  }
  const auto n = GetLe<uint64_t>(blob, 8);
  const auto d = GetLe<uint32_t>(blob, 16);
  const auto dtype = static_cast<uint8_t>(blob[20]);
  if (dtype != kDtypeF32) {
    throw DataError("embeddings: unsupported dtype code " + std::to_string(dtype));
  }
  for (size_t i = 21; i < kEmbeddingHeaderBytes; ++i) {
    if (blob[i] != '\0') throw DataError("embeddings: non-zero reserved bytes");
  }
  if (d == 0) throw DataError("embeddings: dimensionality must be >= 1");
  const uint64_t payload = blob.size() - kEmbeddingHeaderBytes;
  if (n > payload / 4 / d || n * d * 4 != payload) {
    throw DataError("embeddings: payload size " + std::to_string(payload) +
                    " bytes does not match n*d = " + std::to_string(n) + "*" +
                    std::to_string(d) + " floats");
  }
  if (ids.size() != n) {
    throw DataError("embeddings: id sidecar has " + std::to_string(ids.size()) +
                    " lines but the matrix has " + std::to_string(n) + " rows");
  }
  std::vector<float> values(n * d);
  for (size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(
        GetLe<uint32_t>(blob, kEmbeddingHeaderBytes + 4 * i));
  }
  return EmbeddingSet(std::move(ids), d, std::move(values));
}

namespace {

std::vector<std::string> ReadLines(const std::filesystem::path& path) {
  std::string text = ReadFile(path);
  std::vector<std::string> lines;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = end + 1;
  }
  return lines;
}

}  // namespace

std::filesystem::path DefaultIdsPath(const std::filesystem::path& matrix_path) {
  return std::filesystem::path(matrix_path.string() + ".ids");
}

EmbeddingSet LoadEmbeddings(const std::filesystem::path& matrix_path,
                            const std::filesystem::path& ids_path) {
  return DecodeEmbeddings(ReadFile(matrix_path), ReadLines(ids_path));
}

EmbeddingSet LoadEmbeddings(const std::filesystem::path& matrix_path) {
  return LoadEmbeddings(matrix_path, DefaultIdsPath(matrix_path));
}

void WriteEmbeddings(const EmbeddingSet& set,
                     const std::filesystem::path& matrix_path,
                     const std::filesystem::path& ids_path) {
  std::string ids;
  for (const auto& id : set.ids()) {
    if (id.find('\n') != std::string::npos) {
      throw DataError("embeddings: id contains a newline");
    }
    ids += id;
    ids += '\n';
  }
  WriteFileAtomic(matrix_path, EncodeEmbeddingMatrix(set));
  WriteFileAtomic(ids_path, ids);
}

void WriteEmbeddings(const EmbeddingSet& set,
                     const std::filesystem::path& matrix_path) {
  WriteEmbeddings(set, matrix_path, DefaultIdsPath(matrix_path));
}

// --- Manifest I/O ----------------------------------------------------------

std::string SerializeManifest(const SplitManifest& manifest) {
  manifest.Validate();
  Json doc = Json::object();
  doc["schema_version"] = manifest.schema_version;
  doc["method"] = SplitMethodName(manifest.method);
  doc["params"] = manifest.params;
  doc["dataset_id"] = manifest.dataset_id;
  doc["input_digests"] = manifest.input_digests;
  doc["train_easy"] = manifest.train_easy;
  doc["train_hard"] = manifest.train_hard;
  doc["test_easy"] = manifest.test_easy;
  doc["test_hard"] = manifest.test_hard;
  doc["warnings"] = manifest.warnings;
  return doc.dump();
}

namespace {

IdSet IdListMember(const Json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_array()) {
    throw DataError(std::string("manifest: missing id list '") + key + "'");
  }
  IdSet ids;
  for (const auto& v : *it) {
    if (!v.is_string()) throw DataError(std::string("manifest: non-string id in ") + key);
    if (!ids.insert(v.get<std::string>()).second) {
      throw DataError(std::string("manifest: duplicate id in ") + key);
    }
  }
  return ids;
}

}  // namespace

SplitManifest ParseManifest(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DataError(std::string("manifest: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("manifest: not a JSON object");
  auto version = doc.find("schema_version");
  if (version == doc.end() || !version->is_number_integer()) {
    throw DataError("manifest: missing schema_version");
  }
  SplitManifest m;
  m.schema_version = version->get<int>();
  if (m.schema_version != kManifestSchemaVersion) {
    throw DataError("manifest: schema version mismatch (file " +
                    std::to_string(m.schema_version) + ", supported " +
                    std::to_string(kManifestSchemaVersion) + ")");
  }
  try {
    m.method = ParseSplitMethod(doc.at("method").get<std::string>());
    m.params = doc.at("params");
    m.dataset_id = doc.at("dataset_id").get<std::string>();
    m.input_digests =
        doc.at("input_digests").get<std::map<std::string, std::string>>();
    if (doc.contains("warnings")) {
      m.warnings = doc["warnings"].get<std::vector<std::string>>();
    }
  } catch (const Json::exception& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
  m.train_easy = IdListMember(doc, "train_easy");
  m.train_hard = IdListMember(doc, "train_hard");
  m.test_easy = IdListMember(doc, "test_easy");
  m.test_hard = IdListMember(doc, "test_hard");
  m.Validate();
  return m;
}

void WriteManifest(const SplitManifest& manifest,
                   const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeManifest(manifest));
}

SplitManifest ReadManifest(const std::filesystem::path& path) {
  return ParseManifest(ReadFile(path));
}

// --- Predictions I/O -------------------------------------------------------

PredictionFile ParsePredictions(std::string_view text) {
  std::vector<Prediction> records;
  ForEachJsonLine(text, "predictions", [&](const Json& rec, size_t line_no) {
    records.push_back({StringMember(rec, "id", "predictions", line_no),
                       StringMember(rec, "pred", "predictions", line_no)});
  });
  return PredictionFile(std::move(records));
}

PredictionFile LoadPredictions(const std::filesystem::path& path) {
  return ParsePredictions(ReadFile(path));
}

std::string SerializePredictions(const PredictionFile& preds) {
  std::string out;
  for (const auto& rec : preds.records()) {
    out += Json{{"id", rec.id}, {"pred", rec.pred}}.dump();
    out += '\n';
  }
  return out;
}

void WritePredictions(const PredictionFile& preds,
                      const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializePredictions(preds));
}

// --- Id lists --------------------------------------------------------------

std::string SerializeIdList(const IdSet& ids) {
  std::string out;
  for (const auto& id : ids) {
    out += id;
    out += '\n';
  }
  return out;
}

IdSet ParseIdList(std::string_view text) {
  IdSet ids;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) ids.emplace(line);
    pos = end + 1;
  }
  return ids;
}

IdSet LoadIdList(const std::filesystem::path& path) {
  return ParseIdList(ReadFile(path));
}

void WriteIdList(const IdSet& ids, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeIdList(ids));
}

// --- Files and digests -----------------------------------------------------

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view content) {
  static std::atomic<uint64_t> counter{0};
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::filesystem::path tmp =
      path.string() + ".tmp-" + std::to_string(::getpid()) + "-" +
      std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw DataError("write failed for '" + path.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string ContentDigest(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int md_len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &md_len, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = "sha256:";
  for (unsigned int i = 0; i < md_len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string FileDigest(const std::filesystem::path& path) {
  return ContentDigest(ReadFile(path));
}

}  // namespace biasforge
