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

#include "biasforge/debias.h"

#include "biasforge/errors.h"
#include "jsonl.h"

namespace biasforge {

std::vector<WeightedId> SelfDebiasWeights(const ScoreTable& biased_confidence) {
  std::vector<WeightedId> out;
  out.reserve(biased_confidence.size());
  for (const auto& e : biased_confidence.entries()) {
    if (!(e.score >= 0.0 && e.score <= 1.0)) {
      throw DataError("self-debias: confidence of '" + e.id +
                      "' lies outside [0, 1]");
    }
    out.push_back({e.id, 1.0 - e.score});
  }
  return out;
}

IdSet AmbiguousFilter(const ScoreTable& variability, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw UsageError("ambiguous filter: fraction must lie in (0, 1]");
  }
  return SelectTopCount(variability,
                        FloorFractionCount(variability.size(), fraction));
}

std::string SerializeWeights(const std::vector<WeightedId>& weights) {
  std::string out = Json{{"_meta", {{"formula", kSelfDebiasFormula}}}}.dump();
  out += '\n';
  for (const auto& w : weights) {
    out += Json{{"id", w.id}, {"weight", w.weight}}.dump();
    out += '\n';
  }
  return out;
}

std::vector<WeightedId> ParseWeights(std::string_view text) {
  std::vector<WeightedId> out;
  IdSet seen;
  internal::ForEachJsonLine(text, "weights", [&](const Json& rec, size_t line_no) {
    if (rec.contains("_meta")) return;
    WeightedId w;
    w.id = internal::StringMember(rec, "id", "weights", line_no);
    auto it = rec.find("weight");
    if (it == rec.end() || !it->is_number()) {
      internal::LineError("weights", line_no, "missing numeric weight");
    }
    w.weight = it->get<double>();
    if (!(w.weight >= 0.0 && w.weight <= 1.0)) {
      internal::LineError("weights", line_no, "weight outside [0, 1]");
    }
    if (!seen.insert(w.id).second) {
      internal::LineError("weights", line_no, "duplicate id '" + w.id + "'");
    }
    out.push_back(std::move(w));
  });
  return out;
}

void WriteWeights(const std::vector<WeightedId>& weights,
                  const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeWeights(weights));
}

std::vector<WeightedId> LoadWeights(const std::filesystem::path& path) {
  return ParseWeights(ReadFile(path));
}

}  // namespace biasforge
