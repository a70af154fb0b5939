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

#include "biasforge/cartography.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "biasforge/errors.h"
#include "jsonl.h"

namespace biasforge {

ScoreTable::ScoreTable(std::string metric_name, std::vector<ScoredId> entries)
    : metric_name_(std::move(metric_name)), entries_(std::move(entries)) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (!seen.insert(e.id).second) {
      throw DataError("scores: duplicate id '" + e.id + "'");
    }
    if (!std::isfinite(e.score)) {
      throw DataError("scores: non-finite score for '" + e.id + "'");
    }
  }
}

ScoreTable ScoreTable::Restrict(const IdSet& ids) const {
  std::vector<ScoredId> kept;
  for (const auto& e : entries_) {
    if (ids.contains(e.id)) kept.push_back(e);
  }
  if (kept.size() != ids.size()) {
    throw DataError("scores: restriction names unscored ids");
  }
  return ScoreTable(metric_name_, std::move(kept));
}

namespace {

double Mean(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

}  // namespace

ScoreTable Confidence(const DynamicsLog& log) {
  std::vector<ScoredId> entries;
  entries.reserve(log.size());
  for (const auto& rec : log.records()) {
    entries.push_back({rec.id, Mean(rec.epochs)});
  }
  return ScoreTable("confidence", std::move(entries));
}

ScoreTable Variability(const DynamicsLog& log) {
  std::vector<ScoredId> entries;
  entries.reserve(log.size());
  for (const auto& rec : log.records()) {
    const double mean = Mean(rec.epochs);
    double ss = 0.0;
    for (double p : rec.epochs) ss += (p - mean) * (p - mean);
    entries.push_back(
        {rec.id, std::sqrt(ss / static_cast<double>(rec.epochs.size()))});
  }
  return ScoreTable("variability", std::move(entries));
}

size_t HardCountForPercent(size_t n, double q_percent) {
  if (!(q_percent >= 0.0 && q_percent <= 100.0)) {
    throw UsageError("q must lie in [0, 100]");
  }
  // q/100*n computed as q*n/100 so that integral products stay exact.
  const double raw = q_percent * static_cast<double>(n) / 100.0;
  return std::min(n, static_cast<size_t>(std::ceil(raw)));
}

size_t FloorFractionCount(size_t n, double fraction) {
  const double raw = fraction * static_cast<double>(n);
  const double nudged =
      raw + 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, raw);
  return std::min(n, static_cast<size_t>(std::floor(nudged)));
}

namespace {

template <typename Before>
IdSet TakeFirst(const ScoreTable& scores, size_t count, Before before) {
  if (count > scores.size()) {
    throw UsageError("selection count " + std::to_string(count) +
                     " exceeds table size " + std::to_string(scores.size()));
  }
  std::vector<const ScoredId*> order;
  order.reserve(scores.size());
  for (const auto& e : scores.entries()) order.push_back(&e);
  auto cmp = [&](const ScoredId* a, const ScoredId* b) {
    if (a->score != b->score) return before(a->score, b->score);
    return a->id < b->id;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<ptrdiff_t>(count),
                    order.end(), cmp);
  IdSet out;
  for (size_t i = 0; i < count; ++i) out.insert(order[i]->id);
  return out;
}

}  // namespace

IdSet SelectHardCount(const ScoreTable& scores, size_t count) {
  return TakeFirst(scores, count, std::less<double>());
}

IdSet SelectHard(const ScoreTable& scores, double q_percent) {
  if (scores.size() == 0) throw DataError("select_hard: empty score table");
  return SelectHardCount(scores, HardCountForPercent(scores.size(), q_percent));
}

IdSet SelectTopCount(const ScoreTable& scores, size_t count) {
  return TakeFirst(scores, count, std::greater<double>());
}

std::string SerializeScores(const ScoreTable& scores) {
  std::string out;
  for (const auto& e : scores.entries()) {
    out += Json{{"id", e.id}, {"score", e.score}}.dump();
    out += '\n';
  }
  return out;
}

ScoreTable ParseScores(std::string_view text, std::string metric_name) {
  std::vector<ScoredId> entries;
  internal::ForEachJsonLine(text, "scores", [&](const Json& rec, size_t line_no) {
    ScoredId e;
    e.id = internal::StringMember(rec, "id", "scores", line_no);
    auto it = rec.find("score");
    if (it == rec.end() || !it->is_number()) {
      internal::LineError("scores", line_no, "missing numeric score");
    }
    e.score = it->get<double>();
    entries.push_back(std::move(e));
  });
  return ScoreTable(std::move(metric_name), std::move(entries));
}

ScoreTable LoadScores(const std::filesystem::path& path,
                      std::string metric_name) {
  return ParseScores(ReadFile(path), std::move(metric_name));
}

void WriteScores(const ScoreTable& scores, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeScores(scores));
}

}  // namespace biasforge
