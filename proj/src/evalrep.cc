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

#include "biasforge/evalrep.h"

#include <cmath>
#include <cstdio>
#include <set>

#include "biasforge/errors.h"

namespace biasforge {

LabelMap HansLabelMap() {
  return {{"contradiction", "non-entailment"},
          {"neutral", "non-entailment"},
          {"entailment", "entailment"}};
}

LabelMap ParseLabelMap(std::string_view json_text) {
  try {
    return Json::parse(json_text).get<LabelMap>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("label map: expected a JSON object of strings: ") +
                    e.what());
  }
}

LabelMap LoadLabelMap(const std::filesystem::path& path) {
  return ParseLabelMap(ReadFile(path));
}

AccuracyResult Accuracy(const PredictionFile& preds, const InstanceTable& table,
                        const IdSet& subset, const LabelMap* label_map) {
  if (subset.empty()) throw DataError("accuracy: empty evaluation subset");
  AccuracyResult out;
  for (const auto& id : subset) {
    const std::string& gold = table.LabelOf(id);
    const std::string* pred = preds.Find(id);
    if (pred == nullptr) throw DataError("accuracy: no prediction for '" + id + "'");
    const std::string* mapped = pred;
    if (label_map != nullptr) {
      if (auto it = label_map->find(*pred); it != label_map->end()) {
        mapped = &it->second;
      }
    }
    if (!table.labels().contains(*mapped)) {
      throw DataError("accuracy: prediction '" + *mapped + "' for '" + id +
                      "' is not a gold label");
    }
    LabelAccuracy& per = out.per_label[gold];
    ++per.support;
    if (*mapped == gold) {
      ++per.correct;
      ++out.correct;
    }
    ++out.n_evaluated;
  }
  out.accuracy = static_cast<double>(out.correct) /
                 static_cast<double>(out.n_evaluated);
  for (auto& [label, per] : out.per_label) {
    per.accuracy = static_cast<double>(per.correct) / static_cast<double>(per.support);
  }
  return out;
}

namespace {

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double PopulationStd(const std::vector<double>& v) {
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

std::vector<std::pair<std::string, const IdSet*>> Subsets(
    const SplitManifest& manifest, const IdSet& full) {
  std::vector<std::pair<std::string, const IdSet*>> out;
  if (!full.empty()) out.emplace_back(kTestFull, &full);
  if (!manifest.test_hard.empty()) out.emplace_back(kTestHard, &manifest.test_hard);
  return out;
}

}  // namespace

DatasetReport DropReport(const DatasetRuns& input) {
  if (input.manifest == nullptr || input.test_table == nullptr) {
    throw UsageError("drop report: manifest and test table are required");
  }
  const SplitManifest& manifest = *input.manifest;
  DatasetReport report;
  report.dataset_id = input.dataset_id;
  report.baseline = input.baseline;
  report.manifest_digest = ContentDigest(SerializeManifest(manifest));

  std::vector<std::string> order;
  std::map<std::string, std::vector<const Run*>> by_condition;
  for (const Run& run : input.runs) {
    auto& list = by_condition[run.condition];
    if (list.empty() && run.condition != input.baseline) order.push_back(run.condition);
    for (const Run* other : list) {
      if (other->seed == run.seed) {
        throw UsageError("drop report: condition '" + run.condition +
                         "' repeats seed " + std::to_string(run.seed));
      }
    }
    list.push_back(&run);
  }
  if (!by_condition.contains(input.baseline)) {
    throw UsageError("drop report: baseline condition '" + input.baseline +
                     "' has no runs");
  }
  order.insert(order.begin(), input.baseline);

  const IdSet full = manifest.TestIds();
  const auto subsets = Subsets(manifest, full);
  std::map<std::string, std::map<std::string, std::map<uint64_t, double>>> by_seed;
  for (const std::string& name : order) {
    ConditionSummary cond;
    cond.condition = name;
    for (const Run* run : by_condition[name]) {
      cond.seeds.push_back(run->seed);
      if (run->fraction) cond.fraction = run->fraction;
    }
    for (const auto& [subset_name, ids] : subsets) {
      SubsetSummary sub;
      std::map<std::string, std::vector<double>> label_acc;
      for (const Run* run : by_condition[name]) {
        const AccuracyResult r = Accuracy(run->preds, *input.test_table, *ids,
                                          input.label_map);
        sub.n_evaluated = r.n_evaluated;
        sub.accuracies.push_back(r.accuracy);
        by_seed[name][subset_name][run->seed] = r.accuracy;
        for (const auto& [label, per] : r.per_label) {
          sub.per_label[label].support = per.support;
          label_acc[label].push_back(per.accuracy);
        }
      }
      sub.mean = Mean(sub.accuracies);
      sub.std = PopulationStd(sub.accuracies);
      for (auto& [label, summary] : sub.per_label) {
        summary.mean_accuracy = Mean(label_acc[label]);
      }
      cond.subsets.emplace(subset_name, std::move(sub));
    }
    report.conditions.push_back(std::move(cond));
  }

  const ConditionSummary& base = report.conditions.front();
  for (size_t c = 1; c < report.conditions.size(); ++c) {
    const ConditionSummary& treat = report.conditions[c];
    for (const auto& [subset_name, sub] : treat.subsets) {
      DropSummary drop;
      drop.mean = sub.mean - base.subsets.at(subset_name).mean;
      std::vector<double> paired;
      const auto& base_seeds = by_seed[base.condition][subset_name];
      for (const auto& [seed, acc] : by_seed[treat.condition][subset_name]) {
        if (auto it = base_seeds.find(seed); it != base_seeds.end()) {
          paired.push_back(acc - it->second);
        }
      }
      if (!paired.empty()) drop.paired_std = PopulationStd(paired);
      report.drops[treat.condition][subset_name] = drop;
    }
  }
  return report;
}

EvalReport DropReport(const std::vector<DatasetRuns>& inputs) {
  EvalReport report;
  std::map<std::string, std::map<std::string, std::vector<double>>> collected;
  for (const auto& input : inputs) {
    report.datasets.push_back(DropReport(input));
    for (const auto& [cond, subsets] : report.datasets.back().drops) {
      for (const auto& [subset, drop] : subsets) {
        collected[cond][subset].push_back(drop.mean);
      }
    }
  }
  for (const auto& [cond, subsets] : collected) {
    for (const auto& [subset, values] : subsets) {
      report.mean_drops[cond][subset] = Mean(values);
    }
  }
  return report;
}

namespace {

Json OptionalJson(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json DatasetJson(const DatasetReport& d) {
  Json conditions = Json::array();
  for (const auto& c : d.conditions) {
    Json subsets = Json::object();
    for (const auto& [name, s] : c.subsets) {
      Json labels = Json::object();
      for (const auto& [label, l] : s.per_label) {
        labels[label] = {{"support", l.support}, {"mean_accuracy", l.mean_accuracy}};
      }
      subsets[name] = {{"n_evaluated", s.n_evaluated},
                       {"accuracies", s.accuracies},
                       {"mean", s.mean},
                       {"std", s.std},
                       {"per_label", labels}};
    }
    conditions.push_back({{"condition", c.condition},
                          {"seeds", c.seeds},
                          {"fraction", OptionalJson(c.fraction)},
                          {"subsets", subsets}});
  }
  Json drops = Json::object();
  for (const auto& [cond, subsets] : d.drops) {
    for (const auto& [subset, drop] : subsets) {
      drops[cond][subset] = {{"mean", drop.mean},
                             {"paired_std", OptionalJson(drop.paired_std)}};
    }
  }
  return {{"dataset_id", d.dataset_id},
          {"baseline", d.baseline},
          {"manifest_digest", d.manifest_digest},
          {"conditions", conditions},
          {"drops", drops}};
}

std::string Percent(const SubsetSummary* s) {
  if (s == nullptr) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f +- %.2f", 100.0 * s->mean, 100.0 * s->std);
  return buf;
}

std::string SignedPercent(const DropSummary* d) {
  if (d == nullptr) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.2f", 100.0 * d->mean);
  return buf;
}

template <typename M>
const typename M::mapped_type* FindOrNull(const M& map,
                                          const typename M::key_type& key) {
  auto it = map.find(key);
  return it == map.end() ? nullptr : &it->second;
}

}  // namespace

std::string SerializeReport(const EvalReport& report) {
  Json datasets = Json::array();
  for (const auto& d : report.datasets) datasets.push_back(DatasetJson(d));
  return Json{{"datasets", datasets}, {"mean_drops", report.mean_drops}}.dump() +
         "\n";
}

std::string ReportTable(const EvalReport& report) {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof(line), "%-16s %-20s %5s %18s %18s %10s %10s\n",
                "dataset", "condition", "seeds", "test_full %", "test_hard %",
                "drop_full", "drop_hard");
  out += line;
  for (const auto& d : report.datasets) {
    for (const auto& c : d.conditions) {
      const auto* drops = FindOrNull(d.drops, c.condition);
      const DropSummary* drop_full =
          drops ? FindOrNull(*drops, std::string(kTestFull)) : nullptr;
      const DropSummary* drop_hard =
          drops ? FindOrNull(*drops, std::string(kTestHard)) : nullptr;
      std::snprintf(line, sizeof(line), "%-16s %-20s %5zu %18s %18s %10s %10s\n",
                    d.dataset_id.c_str(), c.condition.c_str(), c.seeds.size(),
                    Percent(FindOrNull(c.subsets, std::string(kTestFull))).c_str(),
                    Percent(FindOrNull(c.subsets, std::string(kTestHard))).c_str(),
                    SignedPercent(drop_full).c_str(),
                    SignedPercent(drop_hard).c_str());
      out += line;
    }
  }
  if (!report.mean_drops.empty()) {
    out += "\nmean drop across datasets (accuracy points)\n";
    for (const auto& [cond, subsets] : report.mean_drops) {
      for (const auto& [subset, value] : subsets) {
        std::snprintf(line, sizeof(line), "  %-20s %-10s %+.2f\n", cond.c_str(),
                      subset.c_str(), 100.0 * value);
        out += line;
      }
    }
  }
  return out;
}

std::string CurvesCsv(const EvalReport& report) {
  std::string out =
      "dataset,condition,fraction,subset,mean_accuracy,std_accuracy,n_seeds\n";
  char line[512];
  for (const auto& d : report.datasets) {
    for (const auto& c : d.conditions) {
      if (!c.fraction) continue;
      for (const auto& [subset, s] : c.subsets) {
        std::snprintf(line, sizeof(line), "%s,%s,%.6g,%s,%.6f,%.6f,%zu\n",
                      d.dataset_id.c_str(), c.condition.c_str(), *c.fraction,
                      subset.c_str(), s.mean, s.std, s.accuracies.size());
        out += line;
      }
    }
  }
  return out;
}

std::string EvaluateToJson(const PredictionFile& preds,
                           const InstanceTable& test_table,
                           const SplitManifest& manifest,
                           const LabelMap* label_map) {
  const IdSet full = manifest.TestIds();
  Json subsets = Json::object();
  const std::pair<const char*, const IdSet*> named[] = {
      {kTestFull, &full},
      {"test_easy", &manifest.test_easy},
      {kTestHard, &manifest.test_hard}};
  for (const auto& [name, ids] : named) {
    if (ids->empty()) continue;
    const AccuracyResult r = Accuracy(preds, test_table, *ids, label_map);
    Json labels = Json::object();
    for (const auto& [label, per] : r.per_label) {
      labels[label] = {{"support", per.support},
                       {"correct", per.correct},
                       {"accuracy", per.accuracy}};
    }
    subsets[name] = {{"n_evaluated", r.n_evaluated},
                     {"correct", r.correct},
                     {"accuracy", r.accuracy},
                     {"per_label", labels}};
  }
  return Json{{"manifest_digest", ContentDigest(SerializeManifest(manifest))},
              {"label_map", label_map ? Json(*label_map) : Json(nullptr)},
              {"subsets", subsets}}
             .dump() +
         "\n";
}

DiversityStats ClusterDiversity(const ClusterAssignment& assign,
                                const InstanceTable& table, double threshold) {
  std::map<int, std::map<std::string, size_t>> counts;
  for (size_t i = 0; i < assign.ids.size(); ++i) {
    ++counts[assign.cluster_of[i]][table.LabelOf(assign.ids[i])];
  }
  DiversityStats out;
  out.threshold = threshold;
  double total = 0.0;
  for (const auto& [cluster, c] : counts) {
    size_t size = 0, top = 0;
    for (const auto& [label, count] : c) {
      size += count;
      top = std::max(top, count);
    }
    const size_t minority = size - top;
    const double p = static_cast<double>(minority) / static_cast<double>(size);
    out.minority_proportion[cluster] = p;
    total += p;
    if (static_cast<double>(minority) > threshold * static_cast<double>(size)) {
      ++out.clusters_above;
    }
  }
  out.cluster_count = counts.size();
  if (!counts.empty()) out.average_minority_proportion = total / counts.size();
  return out;
}

std::string SerializeDiversity(const DiversityStats& stats) {
  Json per_cluster = Json::object();
  for (const auto& [cluster, p] : stats.minority_proportion) {
    per_cluster[std::to_string(cluster)] = p;
  }
  return Json{{"average_minority_proportion", stats.average_minority_proportion},
              {"clusters", stats.cluster_count},
              {"clusters_above_threshold", stats.clusters_above},
              {"threshold", stats.threshold},
              {"minority_proportion", per_cluster}}
             .dump() +
         "\n";
}

std::map<std::string, size_t> HardLabelDistribution(
    const SplitManifest& manifest, const InstanceTable& test_table) {
  std::map<std::string, size_t> out;
  for (const auto& label : test_table.labels()) out[label] = 0;
  for (const auto& id : manifest.test_hard) ++out[test_table.LabelOf(id)];
  return out;
}

}  // namespace biasforge
