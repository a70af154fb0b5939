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

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "biasforge/cartography.h"
#include "biasforge/debias.h"
#include "biasforge/errors.h"
#include "biasforge/simlab.h"
#include "biasforge/splitforge.h"
#include "config_reader.h"

namespace biasforge::simlab {

std::string_view EmbeddingSourceName(EmbeddingSource source) {
  switch (source) {
    case EmbeddingSource::kInput: return "input";
    case EmbeddingSource::kHidden: return "hidden";
    case EmbeddingSource::kLogits: return "logits";
  }
  return "hidden";
}

EmbeddingSource ParseEmbeddingSource(std::string_view name) {
  if (name == "input") return EmbeddingSource::kInput;
  if (name == "hidden") return EmbeddingSource::kHidden;
  if (name == "logits") return EmbeddingSource::kLogits;
  throw UsageError("unknown embedding source '" + std::string(name) +
                   "' (expected input, hidden or logits)");
}

namespace {

// The pseudo-label probe starts from its own initialization, never from the
// task probe's weights.
constexpr uint64_t kFreshProbeSeedOffset = 0x5eed;

void ReadMinority(const Json* doc, MinorityOptions& o) {
  if (doc == nullptr) return;
  internal::ConfigReader r(*doc, "minority options");
  std::string mode(MinorityModeName(o.mode));
  std::string source(EmbeddingSourceName(o.source));
  r.Read("k", o.k);
  r.Read("m", o.m);
  r.Read("mode", mode);
  r.Read("deepcluster", o.deepcluster);
  r.Read("pseudo_epochs", o.pseudo_epochs);
  r.Read("source", source);
  r.Read("sample_fraction", o.sample_fraction);
  r.Read("threshold_n", o.threshold_n);
  r.Finish();
  o.mode = ParseMinorityMode(mode);
  o.source = ParseEmbeddingSource(source);
  if (o.k < 1) throw UsageError("minority options: k must be >= 1");
  if (o.pseudo_epochs < 1) throw UsageError("minority options: pseudo_epochs must be >= 1");
}

std::vector<uint64_t> ReadSeeds(internal::ConfigReader& r, std::vector<uint64_t> seeds) {
  r.Read("seeds", seeds);
  if (seeds.empty()) throw UsageError("seeds must not be empty");
  return seeds;
}

}  // namespace

ScenarioSpec ParseScenarioSpec(const Json& doc) {
  ScenarioSpec s;
  internal::ConfigReader r(doc, "scenario spec");
  if (const Json* d = r.Child("dataset")) s.dataset = ParseSynthConfig(*d);
  if (const Json* p = r.Child("probe")) s.probe = ParseProbeConfig(*p);
  if (const Json* m = r.Child("methods")) {
    if (!m->is_array()) throw UsageError("scenario spec: 'methods' must be a list");
    s.methods.clear();
    for (const auto& name : *m) {
      if (!name.is_string()) throw UsageError("scenario spec: method names are strings");
      const SplitMethod method = ParseSplitMethod(name.get<std::string>());
      if (method == SplitMethod::kRandom || method == SplitMethod::kCustom) {
        throw UsageError("scenario spec: methods are cartography, partial_input, minority");
      }
      if (std::find(s.methods.begin(), s.methods.end(), method) == s.methods.end()) {
        s.methods.push_back(method);
      }
    }
  }
  s.seeds = ReadSeeds(r, s.seeds);
  r.Read("q_percent", s.q_percent);
  r.Read("reconcile", s.reconcile);
  ReadMinority(r.Child("minority"), s.minority);
  r.Read("reinsert_fractions", s.reinsert_fractions);
  if (const Json* d = r.Child("debias")) {
    DebiasOptions o;
    internal::ConfigReader dr(*d, "debias options");
    dr.Read("shallow_examples", o.shallow_examples);
    dr.Read("shallow_epochs", o.shallow_epochs);
    dr.Read("ambiguous_fraction", o.ambiguous_fraction);
    dr.Finish();
    if (o.shallow_examples < 1 || o.shallow_epochs < 1) {
      throw UsageError("debias options: shallow_examples and shallow_epochs must be >= 1");
    }
    s.debias = o;
  }
  r.Read("split_seed", s.split_seed);
  r.Finish();
  if (s.methods.empty()) throw UsageError("scenario spec: no methods");
  return s;
}

SweepGrid ParseSweepGrid(const Json& doc) {
  SweepGrid g;
  internal::ConfigReader r(doc, "sweep grid");
  if (const Json* d = r.Child("dataset")) g.dataset = ParseSynthConfig(*d);
  if (const Json* p = r.Child("probe")) g.probe = ParseProbeConfig(*p);
  r.Read("m", g.m);
  r.Read("k", g.k);
  std::vector<std::string> sources;
  r.Read("sources", sources);
  if (!sources.empty()) {
    g.sources.clear();
    for (const auto& s : sources) g.sources.push_back(ParseEmbeddingSource(s));
  }
  ReadMinority(r.Child("minority"), g.base);
  g.seeds = ReadSeeds(r, g.seeds);
  r.Read("split_seed", g.split_seed);
  r.Finish();
  if (g.m.empty() || g.k.empty()) throw UsageError("sweep grid: m and k lists must be non-empty");
  return g;
}

namespace {

EmbeddingSet InputEmbeddings(const InstanceTable& table) {
  const FeatureMatrix f = ExtractFeatures(table);
  std::vector<float> values(f.values.begin(), f.values.end());
  return EmbeddingSet(f.ids, f.dim, std::move(values));
}

std::pair<EmbeddingSet, EmbeddingSet> Representation(const SynthDataset& data,
                                                     const ProbeOutput& probe,
                                                     EmbeddingSource source) {
  switch (source) {
    case EmbeddingSource::kInput:
      return {InputEmbeddings(data.train), InputEmbeddings(data.test)};
    case EmbeddingSource::kLogits:
      return {probe.train_logits, probe.test_logits};
    case EmbeddingSource::kHidden:
      break;
  }
  return {probe.train_hidden, probe.test_hidden};
}

}  // namespace

MinoritySplit BuildMinoritySplit(const SynthDataset& data, const ProbeOutput& task,
                                 const ProbeConfig& probe, const MinorityOptions& o,
                                 uint64_t seed) {
  const ScalingOptions scaling{o.sample_fraction, o.threshold_n, seed};
  auto [task_train, task_test] = Representation(data, task, o.source);
  ClusterAssignment direct = ClusterScaled(task_train, o.k, scaling);

  EmbeddingSet train_emb = task_train;
  EmbeddingSet test_emb = task_test;
  ClusterAssignment assign = direct;
  Json params = {{"k", o.k},
                 {"minority_mode", MinorityModeName(o.mode)},
                 {"deepcluster", o.deepcluster},
                 {"source", EmbeddingSourceName(o.source)},
                 {"seed", seed}};
  if (o.deepcluster) {
    const PseudoLabelFile pseudo = ExportPseudoLabels(task_train, o.m, scaling);
    ProbeConfig fresh = probe;
    fresh.epochs = o.pseudo_epochs;
    fresh.seed = probe.seed + kFreshProbeSeedOffset;
    ProbeOptions options;
    options.label_override = &pseudo;
    const ProbeOutput retrained = TrainProbe(data.train, data.test, fresh, options);
    std::tie(train_emb, test_emb) = Representation(data, retrained, o.source);
    assign = ClusterScaled(train_emb, o.k, scaling);
    params["m"] = o.m;
  }
  ClusterAssignment test_assign = AssignTest(test_emb, train_emb, assign);
  const MajorityMap majority = MajorityLabels(assign, data.train, o.mode);
  SplitInputs in;
  in.train_ids = data.train.Ids();
  in.test_ids = data.test.Ids();
  in.hard_train = TrainMinority(assign, data.train, majority);
  in.hard_test = TestMinority(test_assign, data.test, majority, o.mode);
  in.method = SplitMethod::kMinority;
  in.params = std::move(params);
  in.dataset_id = "synthetic";
  return MinoritySplit{BuildSplit(in), std::move(assign), std::move(test_assign),
                       std::move(direct)};
}

namespace {

std::string FractionCondition(double f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "reinsert@%.2f", f);
  return buf;
}

Json Precision(const IdSet& found, const IdSet& planted) {
  if (found.empty()) return nullptr;
  size_t hits = 0;
  for (const auto& id : found) hits += planted.contains(id) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(found.size());
}

Json DiversityJson(const DiversityStats& s) {
  return Json{{"average_minority_proportion", s.average_minority_proportion},
              {"clusters_above_threshold", s.clusters_above},
              {"threshold", s.threshold},
              {"clusters", s.cluster_count}};
}

// Train on `subset`, return test predictions.
PredictionFile TestPredictions(const SynthDataset& data, const ProbeConfig& config,
                               const IdSet& subset,
                               std::unordered_map<std::string, double> weights = {}) {
  ProbeOptions options;
  options.train_subset = subset;
  options.weights = std::move(weights);
  return TrainProbe(data.train, data.test, config, options).test_predictions;
}

size_t ScaledCount(size_t count, size_t from, size_t to) {
  return (count * to + from - 1) / from;
}

const std::vector<std::string> kMaskCore = {kCoreField};

}  // namespace

ScenarioResult RunScenario(const ScenarioSpec& spec) {
  if (spec.methods.empty()) throw UsageError("scenario: no methods");
  if (spec.seeds.empty()) throw UsageError("scenario: no seeds");
  const SynthDataset data = Generate(spec.dataset);
  const IdSet train_ids = data.train.Ids();
  const IdSet test_ids = data.test.Ids();
  const size_t n_train = train_ids.size();
  const size_t n_test = test_ids.size();
  const ProbeOutput task = TrainProbe(data.train, data.test, spec.probe);

  auto wants = [&](SplitMethod m) {
    return std::find(spec.methods.begin(), spec.methods.end(), m) != spec.methods.end();
  };
  const bool needs_minority = wants(SplitMethod::kMinority) || spec.reconcile ||
                              !spec.reinsert_fractions.empty() || spec.debias.has_value();
  ScenarioResult result;
  result.diagnostics = Json::object();
  result.diagnostics["task_test_accuracy"] = TableAccuracy(task.test_predictions, data.test);
  result.diagnostics["planted_hard"] = {{"train", data.hard_train.size()},
                                        {"test", data.hard_test.size()}};

  std::optional<MinoritySplit> minority;
  if (needs_minority) {
    minority = BuildMinoritySplit(data, task, spec.probe, spec.minority, spec.split_seed);
    result.diagnostics["diversity"] = {
        {"direct", DiversityJson(ClusterDiversity(minority->direct_assign, data.train))},
        {"pseudo_label", DiversityJson(ClusterDiversity(minority->train_assign, data.train))}};
  }

  // Score-based methods share the selection logic.
  auto score_split = [&](SplitMethod method, const ProbeOutput& probe) {
    const ScoreTable train_scores = Confidence(probe.train_dynamics);
    const ScoreTable test_scores = Confidence(*probe.test_dynamics);
    SplitInputs in;
    in.train_ids = train_ids;
    in.test_ids = test_ids;
    in.method = method;
    in.dataset_id = "synthetic";
    if (spec.reconcile) {
      const size_t hard = minority->manifest.train_hard.size();
      in.hard_train = ReconcileQ(train_scores, n_train - hard);
      const size_t hard_test = std::min(n_test, ScaledCount(hard, n_train, n_test));
      in.hard_test = SelectHardCount(test_scores, hard_test);
      in.params = {{"hard_count", hard},
                   {"test_hard_count", hard_test},
                   {"q_percent", 100.0 * static_cast<double>(hard) / static_cast<double>(n_train)},
                   {"reconciled_to", "minority"}};
    } else {
      in.hard_train = SelectHard(train_scores, spec.q_percent);
      in.hard_test = SelectHard(test_scores, spec.q_percent);
      in.params = {{"q_percent", spec.q_percent}};
    }
    return BuildSplit(in);
  };

  for (SplitMethod method : spec.methods) {
    switch (method) {
      case SplitMethod::kCartography:
        result.manifests.emplace(method, score_split(method, task));
        break;
      case SplitMethod::kPartialInput: {
        ProbeOptions masked;
        masked.mask_fields = kMaskCore;
        const ProbeOutput partial = TrainProbe(data.train, data.test, spec.probe, masked);
        result.diagnostics["partial_input_test_accuracy"] =
            TableAccuracy(partial.test_predictions, data.test);
        SplitManifest m = score_split(method, partial);
        m.params["mask_fields"] = kMaskCore;
        result.manifests.emplace(method, std::move(m));
        break;
      }
      case SplitMethod::kMinority:
        result.manifests.emplace(method, minority->manifest);
        break;
      default:
        throw UsageError("scenario: unsupported method");
    }
  }

  Json per_method = Json::object();
  for (const auto& [method, m] : result.manifests) {
    Json labels = Json::object();
    for (const auto& [label, count] : HardLabelDistribution(m, data.test)) labels[label] = count;
    per_method[std::string(SplitMethodName(method))] = {
        {"hard_train", m.train_hard.size()},
        {"hard_test", m.test_hard.size()},
        {"precision_train", Precision(m.train_hard, data.hard_train)},
        {"precision_test", Precision(m.test_hard, data.hard_test)},
        {"hard_test_labels", labels}};
  }
  result.diagnostics["methods"] = per_method;

  std::vector<SplitManifest> reinsertion;
  if (!spec.reinsert_fractions.empty()) {
    reinsertion = ReinsertionSchedule(minority->manifest, spec.reinsert_fractions,
                                      spec.split_seed);
  }

  std::map<size_t, SplitManifest> random_by_size;
  std::vector<DatasetRuns> datasets;
  for (const auto& [method, m] : result.manifests) {
    DatasetRuns runs;
    runs.dataset_id = "synthetic/" + std::string(SplitMethodName(method));
    runs.manifest = &m;
    runs.test_table = &data.test;
    datasets.push_back(std::move(runs));
    const size_t size = m.train_easy.size();
    if (size > 0 && !random_by_size.contains(size)) {
      random_by_size.emplace(size, RandomBaseline(train_ids, test_ids, size, spec.split_seed));
    }
  }

  for (uint64_t seed : spec.seeds) {
    ProbeConfig config = spec.probe;
    config.seed = seed;
    const ProbeOutput full = TrainProbe(data.train, data.test, config);
    std::map<size_t, PredictionFile> random_preds;
    for (const auto& [size, rm] : random_by_size) {
      random_preds.emplace(size, TestPredictions(data, config, rm.train_easy));
    }
    for (DatasetRuns& runs : datasets) {
      const SplitManifest& m = *runs.manifest;
      runs.runs.push_back({"full", seed, full.test_predictions, std::nullopt});
      if (m.train_easy.empty()) continue;
      runs.runs.push_back({"easy", seed, TestPredictions(data, config, m.train_easy), std::nullopt});
      runs.runs.push_back({"random", seed, random_preds.at(m.train_easy.size()), std::nullopt});
      if (m.method != SplitMethod::kMinority) continue;
      for (size_t i = 0; i < reinsertion.size(); ++i) {
        const double f = spec.reinsert_fractions[i];
        runs.runs.push_back({FractionCondition(f), seed,
                             TestPredictions(data, config, reinsertion[i].train_easy), f});
      }
      if (spec.debias) {
        const DebiasOptions& d = *spec.debias;
        // Shallow model on a seeded subset of the easy split; its final-epoch
        // gold probability is the biased confidence.
        const std::vector<std::string> easy(m.train_easy.begin(), m.train_easy.end());
        const std::vector<std::string> subset =
            SampleIds(easy, std::min(d.shallow_examples, easy.size()), spec.split_seed);
        ProbeConfig shallow = config;
        shallow.epochs = d.shallow_epochs;
        ProbeOptions shallow_options;
        shallow_options.train_subset = IdSet(subset.begin(), subset.end());
        const ProbeOutput biased = TrainProbe(data.train, data.test, shallow, shallow_options);
        std::vector<ScoredId> conf;
        for (const auto& rec : biased.train_dynamics.records()) {
          if (m.train_easy.contains(rec.id)) conf.push_back({rec.id, rec.epochs.back()});
        }
        std::unordered_map<std::string, double> weights;
        for (const auto& w : SelfDebiasWeights(ScoreTable("confidence", std::move(conf)))) {
          weights.emplace(w.id, w.weight);
        }
        runs.runs.push_back({"self_debias", seed,
                             TestPredictions(data, config, m.train_easy, std::move(weights)),
                             std::nullopt});

        ProbeOptions easy_options;
        easy_options.train_subset = m.train_easy;
        const ProbeOutput easy_probe = TrainProbe(data.train, data.test, config, easy_options);
        const ScoreTable variability =
            Variability(easy_probe.train_dynamics.Restrict(m.train_easy));
        runs.runs.push_back(
            {"ambiguous_filter", seed,
             TestPredictions(data, config, AmbiguousFilter(variability, d.ambiguous_fraction)),
             std::nullopt});
      }
    }
  }
  result.report = DropReport(datasets);
  return result;
}

std::vector<SweepRow> Sweep(const SweepGrid& grid) {
  if (grid.seeds.empty()) throw UsageError("sweep: no seeds");
  const SynthDataset data = Generate(grid.dataset);
  const IdSet train_ids = data.train.Ids();
  const IdSet test_ids = data.test.Ids();
  const ProbeOutput task = TrainProbe(data.train, data.test, grid.probe);

  std::vector<SweepRow> rows;
  for (size_t m : grid.m) {
    for (EmbeddingSource source : grid.sources) {
      for (size_t k : grid.k) {
        MinorityOptions o = grid.base;
        o.m = m;
        o.k = k;
        o.source = source;
        const MinoritySplit split =
            BuildMinoritySplit(data, task, grid.probe, o, grid.split_seed);
        const SplitManifest& manifest = split.manifest;
        SweepRow row;
        row.m = m;
        row.k = k;
        row.source = source;
        row.hard_train = manifest.train_hard.size();
        row.hard_test = manifest.test_hard.size();
        if (!manifest.test_hard.empty() && !manifest.train_easy.empty()) {
          const SplitManifest random = RandomBaseline(
              train_ids, test_ids, manifest.train_easy.size(), grid.split_seed);
          std::vector<double> easy_acc, random_acc;
          for (uint64_t seed : grid.seeds) {
            ProbeConfig config = grid.probe;
            config.seed = seed;
            easy_acc.push_back(
                Accuracy(TestPredictions(data, config, manifest.train_easy), data.test,
                         manifest.test_hard)
                    .accuracy);
            random_acc.push_back(
                Accuracy(TestPredictions(data, config, random.train_easy), data.test,
                         manifest.test_hard)
                    .accuracy);
          }
          auto mean = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
          };
          row.easy_hard_accuracy = mean(easy_acc);
          row.random_hard_accuracy = mean(random_acc);
          row.drop = row.easy_hard_accuracy - row.random_hard_accuracy;
        }
        rows.push_back(row);
      }
    }
  }
  std::vector<size_t> order(rows.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const bool ea = rows[a].hard_test == 0, eb = rows[b].hard_test == 0;
    if (ea != eb) return eb;
    return rows[a].drop < rows[b].drop;
  });
  std::vector<SweepRow> ranked;
  for (size_t r = 0; r < order.size(); ++r) {
    ranked.push_back(rows[order[r]]);
    ranked.back().rank = r + 1;
  }
  return ranked;
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::string out =
      "rank,m,k,source,hard_train,hard_test,easy_hard_accuracy,random_hard_accuracy,drop\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%s,%zu,%zu,%.6f,%.6f,%.6f\n", r.rank, r.m, r.k,
                  std::string(EmbeddingSourceName(r.source)).c_str(), r.hard_train, r.hard_test,
                  r.easy_hard_accuracy, r.random_hard_accuracy, r.drop);
    out += buf;
  }
  return out;
}

}  // namespace biasforge::simlab
