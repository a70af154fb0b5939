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

#ifndef BIASFORGE_EVALREP_H_
#define BIASFORGE_EVALREP_H_

// Accuracy scoring against split manifests, performance-drop reports across
// training conditions, and label-diversity diagnostics.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "biasforge/cluster.h"
#include "biasforge/dataio.h"

namespace biasforge {

// Prediction label -> gold label space. Unmapped predictions pass through.
using LabelMap = std::map<std::string, std::string>;

// Three-way NLI predictions scored against two-way gold labels.
LabelMap HansLabelMap();
LabelMap ParseLabelMap(std::string_view json_text);
LabelMap LoadLabelMap(const std::filesystem::path& path);

struct LabelAccuracy {
  size_t support = 0;
  size_t correct = 0;
  double accuracy = 0.0;
};

struct AccuracyResult {
  size_t n_evaluated = 0;
  size_t correct = 0;
  // correct / n_evaluated, one division.
  double accuracy = 0.0;
  // Keyed by gold label.
  std::map<std::string, LabelAccuracy> per_label;
};

// Throws DataError when the subset is empty, a subset id is unknown to the
// table or has no prediction, or a mapped prediction is not a gold label.
AccuracyResult Accuracy(const PredictionFile& preds, const InstanceTable& table,
                        const IdSet& subset, const LabelMap* label_map = nullptr);

inline constexpr char kTestFull[] = "test_full";
inline constexpr char kTestHard[] = "test_hard";

struct Run {
  std::string condition;
  uint64_t seed = 0;
  PredictionFile preds{{}};
  // Reinsertion fraction, for curve output.
  std::optional<double> fraction;
};

struct LabelSummary {
  size_t support = 0;
  // Averaged over seeds.
  double mean_accuracy = 0.0;
};

struct SubsetSummary {
  size_t n_evaluated = 0;
  // Parallel to ConditionSummary::seeds.
  std::vector<double> accuracies;
  double mean = 0.0;
  // Population standard deviation over seeds.
  double std = 0.0;
  std::map<std::string, LabelSummary> per_label;
};

struct ConditionSummary {
  std::string condition;
  std::vector<uint64_t> seeds;
  std::optional<double> fraction;
  std::map<std::string, SubsetSummary> subsets;
};

struct DropSummary {
  // mean(treatment) - mean(baseline).
  double mean = 0.0;
  // Over seeds present in both conditions, paired by seed; absent when the
  // seed sets do not overlap.
  std::optional<double> paired_std;
};

struct DatasetReport {
  std::string dataset_id;
  std::string baseline;
  std::string manifest_digest;
  std::vector<ConditionSummary> conditions;
  // treatment condition -> subset -> drop against the baseline.
  std::map<std::string, std::map<std::string, DropSummary>> drops;
};

struct EvalReport {
  std::vector<DatasetReport> datasets;
  // Unweighted mean over datasets reporting that condition.
  std::map<std::string, std::map<std::string, double>> mean_drops;
};

struct DatasetRuns {
  std::string dataset_id;
  const SplitManifest* manifest = nullptr;
  const InstanceTable* test_table = nullptr;
  std::vector<Run> runs;
  std::string baseline = "full";
  const LabelMap* label_map = nullptr;
};

// Conditions are listed baseline first, then in order of first appearance.
// Subsets that are empty in the manifest are omitted. Throws UsageError when
// the baseline has no runs or a (condition, seed) pair repeats.
DatasetReport DropReport(const DatasetRuns& input);
EvalReport DropReport(const std::vector<DatasetRuns>& inputs);

// Canonical JSON (sorted keys, no whitespace).
std::string SerializeReport(const EvalReport& report);
// Fixed-width table: one row per dataset x condition.
std::string ReportTable(const EvalReport& report);
// dataset,condition,fraction,subset,mean_accuracy,std_accuracy,n_seeds for
// every condition carrying a fraction.
std::string CurvesCsv(const EvalReport& report);

// Accuracies of a single prediction file over test_full, test_easy and
// test_hard (empty subsets are skipped), as canonical JSON.
std::string EvaluateToJson(const PredictionFile& preds,
                           const InstanceTable& test_table,
                           const SplitManifest& manifest,
                           const LabelMap* label_map);

struct DiversityStats {
  // Mean over non-empty clusters of 1 - majority_count / cluster_size.
  double average_minority_proportion = 0.0;
  double threshold = 0.10;
  // Clusters whose minority proportion is strictly above the threshold.
  size_t clusters_above = 0;
  size_t cluster_count = 0;
  std::map<int, double> minority_proportion;
};

DiversityStats ClusterDiversity(const ClusterAssignment& assign,
                                const InstanceTable& table,
                                double threshold = 0.10);

// Canonical JSON: average_minority_proportion, clusters,
// clusters_above_threshold, threshold and per-cluster minority_proportion.
std::string SerializeDiversity(const DiversityStats& stats);

// Gold-label counts over test_hard; every label of the table appears.
std::map<std::string, size_t> HardLabelDistribution(
    const SplitManifest& manifest, const InstanceTable& test_table);

}  // namespace biasforge

#endif  // BIASFORGE_EVALREP_H_
