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

#ifndef BIASFORGE_SIMLAB_H_
#define BIASFORGE_SIMLAB_H_

// Synthetic datasets with a planted spurious feature, and the end-to-end
// drivers that push them through split construction, probe training and
// drop reporting.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "biasforge/cluster.h"
#include "biasforge/dataio.h"
#include "biasforge/evalrep.h"
#include "biasforge/minority.h"
#include "biasforge/probe.h"

namespace biasforge::simlab {

struct SynthConfig {
  size_t n_train = 10000;
  size_t n_test = 2000;
  size_t labels = 2;
  size_t d_core = 40;
  double core_separation = 2.5;
  double noise_sigma = 1.0;
  // Probability that the spurious feature agrees with the label.
  double bias_rate = 0.9;
  double spurious_scale = 2.0;
  uint64_t seed = 0;

  void Validate() const;
  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

SynthConfig ParseSynthConfig(const Json& doc);
Json SynthConfigToJson(const SynthConfig& config);

// Label names c0, c1, ...; ids tr00000.. and te00000... Every record has two
// numeric fields: "core" (d_core values) and "spurious" (1 value for two
// labels, a one-hot block of `labels` values otherwise).
inline constexpr char kCoreField[] = "core";
inline constexpr char kSpuriousField[] = "spurious";

struct SynthDataset {
  InstanceTable train;
  InstanceTable test;
  // Instances whose spurious feature points away from their label.
  IdSet hard_train;
  IdSet hard_test;
};

// Label drawn uniformly; core = class mean + N(0, sigma^2) per dimension,
// class means pairwise `core_separation` apart; the spurious feature is
// aligned with probability bias_rate, otherwise it points to a uniformly
// drawn other label. Deterministic per seed.
SynthDataset Generate(const SynthConfig& config);

// train.jsonl, test.jsonl, hard_train.txt, hard_test.txt under `dir`.
void WriteSynthDataset(const SynthDataset& data, const std::filesystem::path& dir);

// Which representation a probe contributes to clustering.
enum class EmbeddingSource { kInput, kHidden, kLogits };
std::string_view EmbeddingSourceName(EmbeddingSource source);
EmbeddingSource ParseEmbeddingSource(std::string_view name);

struct MinorityOptions {
  size_t k = 10;
  size_t m = 100;
  MinorityMode mode = MinorityMode::kAllButMajority;
  // One pseudo-label round: cluster at m, train a fresh probe for
  // pseudo_epochs on the cluster ids, cluster its representation at k.
  bool deepcluster = true;
  size_t pseudo_epochs = 1;
  EmbeddingSource source = EmbeddingSource::kHidden;
  double sample_fraction = 0.5;
  size_t threshold_n = 100000;
};

struct DebiasOptions {
  // Shallow biased model: a seeded subset of the easy split, few epochs.
  size_t shallow_examples = 500;
  size_t shallow_epochs = 3;
  double ambiguous_fraction = 0.33;
};

struct ScenarioSpec {
  SynthConfig dataset;
  ProbeConfig probe;
  std::vector<SplitMethod> methods = {SplitMethod::kCartography,
                                      SplitMethod::kPartialInput,
                                      SplitMethod::kMinority};
  // Seeds of the condition probes. Split construction uses probe.seed.
  std::vector<uint64_t> seeds = {0, 1, 2};
  // Used for cartography and partial input when not reconciling.
  double q_percent = 10.0;
  // Size cartography and partial-input hard sets to the minority split.
  bool reconcile = true;
  MinorityOptions minority;
  // Reinsertion curve on the minority split; empty disables it.
  std::vector<double> reinsert_fractions;
  // Self-debias and ambiguous-filter conditions on the minority split.
  std::optional<DebiasOptions> debias;
  // Random-baseline and reinsertion permutation seed.
  uint64_t split_seed = 0;
};

ScenarioSpec ParseScenarioSpec(const Json& doc);

struct ScenarioResult {
  // One dataset entry per method, id "synthetic/<method>".
  EvalReport report;
  std::map<SplitMethod, SplitManifest> manifests;
  // Per method: hard-set sizes, precision against the planted hard ids,
  // hard-test label counts; cluster diversity of the task and pseudo-label
  // embeddings; partial-input probe accuracy.
  Json diagnostics;
};

ScenarioResult RunScenario(const ScenarioSpec& spec);

// Everything the minority method produces on one dataset.
struct MinoritySplit {
  SplitManifest manifest;
  ClusterAssignment train_assign;
  ClusterAssignment test_assign;
  // Clustering of the task probe's own representation at k.
  ClusterAssignment direct_assign;
};

// `task` is the probe trained on the full training set.
MinoritySplit BuildMinoritySplit(const SynthDataset& data, const ProbeOutput& task,
                                 const ProbeConfig& probe, const MinorityOptions& options,
                                 uint64_t seed);

struct SweepGrid {
  SynthConfig dataset;
  ProbeConfig probe;
  std::vector<size_t> m = {100};
  std::vector<size_t> k = {10};
  std::vector<EmbeddingSource> sources = {EmbeddingSource::kHidden};
  MinorityOptions base;
  std::vector<uint64_t> seeds = {0, 1, 2};
  uint64_t split_seed = 0;
};

SweepGrid ParseSweepGrid(const Json& doc);

struct SweepRow {
  size_t rank = 0;
  size_t m = 0;
  size_t k = 0;
  EmbeddingSource source = EmbeddingSource::kHidden;
  size_t hard_train = 0;
  size_t hard_test = 0;
  // Seed means on test_hard; 0 when the hard test set is empty.
  double easy_hard_accuracy = 0.0;
  double random_hard_accuracy = 0.0;
  // easy - random; 0 for an empty hard test set.
  double drop = 0.0;
};

// One row per cell, ranked by drop ascending (largest drop first). Cells
// without hard test instances rank last; ties keep grid order.
std::vector<SweepRow> Sweep(const SweepGrid& grid);
std::string SweepCsv(const std::vector<SweepRow>& rows);

}  // namespace biasforge::simlab

#endif  // BIASFORGE_SIMLAB_H_
