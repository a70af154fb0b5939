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

#include "cli.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <set>

#include "biasforge/cartography.h"
#include "biasforge/cluster.h"
#include "biasforge/dataio.h"
#include "biasforge/debias.h"
#include "biasforge/errors.h"
#include "biasforge/evalrep.h"
#include "biasforge/minority.h"
#include "biasforge/parallel.h"
#include "biasforge/probe.h"
#include "biasforge/simlab.h"
#include "biasforge/splitforge.h"
#include "pipeline.h"

namespace biasforge::cli {

namespace fs = std::filesystem;

std::string VersionString() {
  return std::string("biasforge ") + kToolVersion + " (format version " +
         std::to_string(kFormatVersion) + ")";
}

namespace {

Json LoadJson(const std::string& path) {
  try {
    return Json::parse(ReadFile(path));
  } catch (const Json::exception& e) {
    throw DataError("'" + path + "': invalid JSON: " + e.what());
  }
}

EmbeddingSet LoadMatrix(const std::string& matrix, const std::string& ids) {
  return ids.empty() ? LoadEmbeddings(matrix) : LoadEmbeddings(matrix, ids);
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void WriteText(const std::string& path, const std::string& content) {
  WriteFileAtomic(path, content);
}

// Paths in a report spec are relative to the spec itself.
std::string Resolve(const fs::path& base, const std::string& p) {
  return fs::path(p).is_absolute() ? p : (base / p).string();
}

std::unique_ptr<LabelMap> LabelMapFrom(const std::string& spec, const fs::path& base) {
  if (spec.empty()) return nullptr;
  if (spec == "hans") return std::make_unique<LabelMap>(HansLabelMap());
  return std::make_unique<LabelMap>(LoadLabelMap(Resolve(base, spec)));
}

// Everything one invocation needs: parsed values land here, and the chosen
// subcommand's action runs after parsing succeeds.
struct Context {
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  int threads = 0;
  uint64_t seed = 0;
  std::function<void()> action;
};

using Setup = void (*)(CLI::App&, Context&);

// --- cartography ------------------------------------------------------------

void AddCartography(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string dynamics, metric = "confidence", instances, out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("cartography", "Confidence or variability scores from dynamics");
  sub->add_option("--dynamics", o->dynamics, "Dynamics log")->required();
  sub->add_option("--metric", o->metric)->check(CLI::IsMember({"confidence", "variability"}));
  sub->add_option("--instances", o->instances, "Validate gold labels against this table");
  sub->add_option("--out", o->out, "Scores file")->required();
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      std::optional<InstanceTable> table;
      if (!o->instances.empty()) table = LoadInstances(o->instances);
      const DynamicsLog log = LoadDynamics(o->dynamics, table ? &table->labels() : nullptr);
      const ScoreTable scores = o->metric == "confidence" ? Confidence(log) : Variability(log);
      WriteScores(scores, o->out);
      *ctx.out << o->metric << ": " << scores.size() << " scores\n";
    };
  });
}

void AddSelectHard(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string scores, out;
    double q = 0;
    size_t count = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("select-hard", "Lowest-scoring ids");
  sub->add_option("--scores", o->scores)->required();
  auto* q = sub->add_option("--q", o->q, "Percent of ids to select (rounded up)");
  auto* count = sub->add_option("--count", o->count, "Exact number of ids");
  q->excludes(count);
  sub->add_option("--out", o->out)->required();
  sub->callback([o, q, count, &ctx] {
    if (q->count() + count->count() != 1) throw CLI::ValidationError("exactly one of --q, --count");
    const bool by_percent = q->count() > 0;
    ctx.action = [o, by_percent, &ctx] {
      const ScoreTable scores = LoadScores(o->scores);
      const IdSet hard =
          by_percent ? SelectHard(scores, o->q) : SelectHardCount(scores, o->count);
      WriteIdList(hard, o->out);
      *ctx.out << "hard: " << hard.size() << " of " << scores.size() << "\n";
    };
  });
}

// --- clustering ---------------------------------------------------------------

struct ScalingFlags {
  std::string embeddings, ids, out;
  double sample_fraction = 0.5;
  size_t threshold = 100000;
};

void AddScalingFlags(CLI::App* sub, ScalingFlags& f) {
  sub->add_option("--embeddings", f.embeddings, "BAE1 matrix")->required();
  sub->add_option("--ids", f.ids, "Id sidecar (default <embeddings>.ids)");
  sub->add_option("--sample-fraction", f.sample_fraction);
  sub->add_option("--threshold", f.threshold, "Largest n clustered exactly");
  sub->add_option("--out", f.out)->required();
}

void AddCluster(CLI::App& app, Context& ctx) {
  struct Opts : ScalingFlags {
    size_t k = 10;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("cluster", "Ward clustering cut at k");
  AddScalingFlags(sub, *o);
  sub->add_option("--k", o->k)->required();
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      const EmbeddingSet emb = LoadMatrix(o->embeddings, o->ids);
      const ClusterAssignment a =
          ClusterScaled(emb, o->k, {o->sample_fraction, o->threshold, ctx.seed});
      WriteAssignment(a, o->out);
      *ctx.out << "clusters: " << a.k << " over " << a.ids.size() << " ids"
               << (a.provenance.sampled ? " (sampled)" : "") << "\n";
    };
  });
}

void AddPseudoLabels(CLI::App& app, Context& ctx) {
  struct Opts : ScalingFlags {
    size_t m = 1500;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("pseudo-labels", "Cluster ids at m for pseudo-label training");
  AddScalingFlags(sub, *o);
  sub->add_option("--m", o->m);
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      const EmbeddingSet emb = LoadMatrix(o->embeddings, o->ids);
      const PseudoLabelFile p =
          ExportPseudoLabels(emb, o->m, {o->sample_fraction, o->threshold, ctx.seed});
      WriteAssignment(p, o->out);
      *ctx.out << "pseudo-labels: " << p.k << " over " << p.ids.size() << " ids\n";
    };
  });
}

// --- minority -------------------------------------------------------------------

void AddMinority(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string assign, instances, mode = "all_but_majority", out, majority_out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("minority", "Training ids outside their cluster's majority");
  sub->add_option("--assign", o->assign)->required();
  sub->add_option("--instances", o->instances)->required();
  sub->add_option("--mode", o->mode, "all-but-majority | least-label");
  sub->add_option("--out", o->out, "Hard training ids")->required();
  sub->add_option("--majority-out", o->majority_out, "Majority map for minority-test");
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      const MinorityMode mode = ParseMinorityMode(o->mode);
      const ClusterAssignment assign = LoadAssignment(o->assign);
      const InstanceTable table = LoadInstances(o->instances);
      const MajorityMap majority = MajorityLabels(assign, table, mode);
      const IdSet hard = TrainMinority(assign, table, majority);
      WriteIdList(hard, o->out);
      if (!o->majority_out.empty()) WriteMajorityMap(majority, o->majority_out);
      *ctx.out << "minority: " << hard.size() << " of " << assign.ids.size() << "\n";
    };
  });
}

void AddAssignTest(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string test_emb, test_ids, train_emb, train_ids, assign, out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("assign-test", "Nearest-training-row cluster for test rows");
  sub->add_option("--test-emb", o->test_emb)->required();
  sub->add_option("--test-ids", o->test_ids);
  sub->add_option("--train-emb", o->train_emb)->required();
  sub->add_option("--train-ids", o->train_ids);
  sub->add_option("--assign", o->assign, "Training assignment")->required();
  sub->add_option("--out", o->out)->required();
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      const ClusterAssignment a = AssignTest(LoadMatrix(o->test_emb, o->test_ids),
                                             LoadMatrix(o->train_emb, o->train_ids),
                                             LoadAssignment(o->assign));
      WriteAssignment(a, o->out);
      *ctx.out << "assigned: " << a.ids.size() << " test ids\n";
    };
  });
}

void AddMinorityTest(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string test_assign, test_instances, majority, mode, out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("minority-test", "Hard test ids from training majorities");
  sub->add_option("--test-assign", o->test_assign)->required();
  sub->add_option("--test-instances", o->test_instances)->required();
  sub->add_option("--majority", o->majority)->required();
  sub->add_option("--mode", o->mode, "Defaults to the majority map's mode");
  sub->add_option("--out", o->out)->required();
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      const MajorityMap majority = LoadMajorityMap(o->majority);
      const MinorityMode mode = o->mode.empty() ? majority.mode : ParseMinorityMode(o->mode);
      const ClusterAssignment assign = LoadAssignment(o->test_assign);
      const IdSet hard =
          TestMinority(assign, LoadInstances(o->test_instances), majority, mode);
      WriteIdList(hard, o->out);
      *ctx.out << "hard test: " << hard.size() << " of " << assign.ids.size() << "\n";
    };
  });
}

// --- splitforge -----------------------------------------------------------------

void PrintWarnings(const SplitManifest& m, Context& ctx) {
  for (const auto& w : m.warnings) *ctx.err << "warning: " << w << "\n";
}

void AddBuildSplit(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string train, test, hard_train, hard_test, method = "custom", params = "{}",
        dataset_id, out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("build-split", "Manifest from hard id lists");
  sub->add_option("--train", o->train, "Training instances")->required();
  sub->add_option("--test", o->test, "Test instances")->required();
  sub->add_option("--hard-train", o->hard_train, "Hard training ids (default none)");
  sub->add_option("--hard-test", o->hard_test, "Hard test ids (default none)");
  sub->add_option("--method", o->method);
  sub->add_option("--params", o->params, "JSON object recorded in the manifest");
  sub->add_option("--dataset-id", o->dataset_id);
  sub->add_option("--out", o->out)->required();
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      SplitInputs in;
      in.method = ParseSplitMethod(o->method);
      try {
        in.params = Json::parse(o->params);
      } catch (const Json::exception& e) {
        throw UsageError(std::string("--params: invalid JSON: ") + e.what());
      }
      if (!in.params.is_object()) throw UsageError("--params must be a JSON object");
      in.dataset_id = o->dataset_id;
      in.train_ids = LoadInstances(o->train).Ids();
      in.test_ids = LoadInstances(o->test).Ids();
      in.input_digests["train"] = FileDigest(o->train);
      in.input_digests["test"] = FileDigest(o->test);
      if (!o->hard_train.empty()) {
        in.hard_train = LoadIdList(o->hard_train);
        in.input_digests["hard_train"] = FileDigest(o->hard_train);
      }
      if (!o->hard_test.empty()) {
        in.hard_test = LoadIdList(o->hard_test);
        in.input_digests["hard_test"] = FileDigest(o->hard_test);
      }
      const SplitManifest m = BuildSplit(in);
      WriteManifest(m, o->out);
      PrintWarnings(m, ctx);
      *ctx.out << "train easy/hard: " << m.train_easy.size() << "/" << m.train_hard.size()
               << ", test easy/hard: " << m.test_easy.size() << "/" << m.test_hard.size()
               << "\n";
    };
  });
}

void AddReconcile(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string scores, out;
    size_t target = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("reconcile", "Hard set leaving exactly S easy training ids");
  sub->add_option("--scores", o->scores)->required();
  sub->add_option("--target-size", o->target, "Easy training size")->required();
  sub->add_option("--out", o->out, "Hard ids")->required();
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      const ScoreTable scores = LoadScores(o->scores);
      const IdSet hard = ReconcileQ(scores, o->target);
      WriteIdList(hard, o->out);
      *ctx.out << "hard: " << hard.size() << " of " << scores.size() << "\n";
    };
  });
}

void AddRandomBaseline(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string manifest, train, test, out;
    size_t size = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("random-baseline", "Size-matched random training split");
  auto* manifest = sub->add_option("--manifest", o->manifest, "Take both universes from here");
  auto* train = sub->add_option("--train", o->train, "Training instances");
  auto* test = sub->add_option("--test", o->test, "Test instances");
  manifest->excludes(train)->excludes(test);
  sub->add_option("--size", o->size, "Easy training size")->required();
  sub->add_option("--out", o->out)->required();
  sub->callback([o, &ctx] {
    if (o->manifest.empty() && (o->train.empty() || o->test.empty())) {
      throw CLI::ValidationError("give --manifest or both --train and --test");
    }
    ctx.action = [o, &ctx] {
      IdSet train_ids, test_ids;
      std::map<std::string, std::string> digests;
      std::string dataset_id;
      if (!o->manifest.empty()) {
        const SplitManifest source = ReadManifest(o->manifest);
        train_ids = source.TrainIds();
        test_ids = source.TestIds();
        dataset_id = source.dataset_id;
        digests["manifest"] = FileDigest(o->manifest);
      } else {
        train_ids = LoadInstances(o->train).Ids();
        test_ids = LoadInstances(o->test).Ids();
        digests["train"] = FileDigest(o->train);
        digests["test"] = FileDigest(o->test);
      }
      SplitManifest m = RandomBaseline(train_ids, test_ids, o->size, ctx.seed);
      m.dataset_id = dataset_id;
      m.input_digests = digests;
      WriteManifest(m, o->out);
      PrintWarnings(m, ctx);
      *ctx.out << "random: " << m.train_easy.size() << " of " << train_ids.size() << "\n";
    };
  });
}

void AddReinsert(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string manifest, out_dir;
    std::vector<double> fractions = {0.1, 0.2, 0.35, 0.5, 0.7};
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("reinsert", "Manifests with hard training ids moved back");
  sub->add_option("--manifest", o->manifest)->required();
  sub->add_option("--fractions", o->fractions)->delimiter(',');
  sub->add_option("--out-dir", o->out_dir, "Receives reinsert_<fraction>.json")->required();
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      const SplitManifest source = ReadManifest(o->manifest);
      const std::vector<SplitManifest> schedule =
          ReinsertionSchedule(source, o->fractions, ctx.seed);
      std::set<std::string> names;
      for (double f : o->fractions) {
        if (!names.insert(Fixed(f, 2)).second) {
          throw UsageError("--fractions: " + Fixed(f, 2) + " appears twice at two decimals");
        }
      }
      fs::create_directories(o->out_dir);
      for (size_t i = 0; i < schedule.size(); ++i) {
        const fs::path p = fs::path(o->out_dir) / ("reinsert_" + Fixed(o->fractions[i], 2) + ".json");
        WriteManifest(schedule[i], p);
        *ctx.out << p.string() << ": " << schedule[i].train_easy.size() << " training ids\n";
      }
    };
  });
}

// --- evalrep --------------------------------------------------------------------

void AddEvaluate(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string preds, instances, manifest, label_map, out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("evaluate", "Accuracy of one prediction file per test subset");
  sub->add_option("--preds", o->preds)->required();
  sub->add_option("--instances", o->instances, "Test instances")->required();
  sub->add_option("--manifest", o->manifest)->required();
  sub->add_option("--label-map", o->label_map, "JSON map file, or 'hans'");
  sub->add_option("--out", o->out)->required();
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      const auto map = LabelMapFrom(o->label_map, ".");
      const std::string json = EvaluateToJson(LoadPredictions(o->preds),
                                              LoadInstances(o->instances),
                                              ReadManifest(o->manifest), map.get());
      WriteText(o->out, json);
      *ctx.out << json;
    };
  });
}

// Report spec:
// {"baseline": "full",
//  "datasets": [{"id": str, "manifest": path, "test": path, "label_map": path|"hans",
//                "runs": [{"condition": str, "seed": int, "preds": path,
//                          "fraction": float}]}]}
EvalReport ReportFromSpec(const std::string& spec_path) {
  const Json spec = LoadJson(spec_path);
  const fs::path base = fs::path(spec_path).parent_path();
  auto fail = [&](const std::string& what) { throw DataError("'" + spec_path + "': " + what); };
  if (!spec.is_object() || !spec.contains("datasets") || !spec["datasets"].is_array()) {
    fail("expected an object with a 'datasets' list");
  }
  const std::string baseline = spec.value("baseline", "full");
  struct Loaded {
    SplitManifest manifest;
    InstanceTable test;
    std::unique_ptr<LabelMap> map;
  };
  std::vector<std::unique_ptr<Loaded>> loaded;
  std::vector<DatasetRuns> inputs;
  for (const auto& d : spec["datasets"]) {
    try {
      auto l = std::make_unique<Loaded>(
          Loaded{ReadManifest(Resolve(base, d.at("manifest").get<std::string>())),
                 LoadInstances(Resolve(base, d.at("test").get<std::string>())),
                 LabelMapFrom(d.value("label_map", ""), base)});
      DatasetRuns runs;
      runs.dataset_id = d.value("id", l->manifest.dataset_id);
      runs.baseline = baseline;
      runs.manifest = &l->manifest;
      runs.test_table = &l->test;
      runs.label_map = l->map.get();
      for (const auto& r : d.at("runs")) {
        Run run;
        run.condition = r.at("condition").get<std::string>();
        run.seed = r.value("seed", uint64_t{0});
        run.preds = LoadPredictions(Resolve(base, r.at("preds").get<std::string>()));
        if (r.contains("fraction")) run.fraction = r["fraction"].get<double>();
        runs.runs.push_back(std::move(run));
      }
      inputs.push_back(std::move(runs));
      loaded.push_back(std::move(l));
    } catch (const Json::exception& e) {
      fail(std::string("malformed dataset entry: ") + e.what());
    }
  }
  return DropReport(inputs);
}

void AddReport(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string runs, json;
    std::vector<std::string> out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("report", "Drop table and curves from many runs");
  sub->add_option("--runs", o->runs, "Report spec (JSON)")->required();
  sub->add_option("--out", o->out, "table.txt[,curves.csv]")->required()->delimiter(',');
  sub->add_option("--json", o->json, "Canonical JSON report");
  sub->callback([o, &ctx] {
    if (o->out.size() > 2) throw CLI::ValidationError("--out takes at most two paths");
    ctx.action = [o, &ctx] {
      const EvalReport report = ReportFromSpec(o->runs);
      WriteText(o->out[0], ReportTable(report));
      if (o->out.size() > 1) WriteText(o->out[1], CurvesCsv(report));
      if (!o->json.empty()) WriteText(o->json, SerializeReport(report));
      *ctx.out << ReportTable(report);
    };
  });
}

void AddDiversity(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string assign, instances, out;
    double threshold = 0.10;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("diversity", "Within-cluster minority-label proportions");
  sub->add_option("--assign", o->assign)->required();
  sub->add_option("--instances", o->instances)->required();
  sub->add_option("--threshold", o->threshold);
  sub->add_option("--out", o->out)->required();
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      const DiversityStats s =
          ClusterDiversity(LoadAssignment(o->assign), LoadInstances(o->instances), o->threshold);
      WriteText(o->out, SerializeDiversity(s));
      *ctx.out << "average minority proportion " << Fixed(s.average_minority_proportion, 4)
               << ", " << s.clusters_above << " of " << s.cluster_count << " clusters above "
               << Fixed(s.threshold, 2) << "\n";
    };
  });
}

void AddHardLabels(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string manifest, instances, out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("hard-labels", "Gold-label counts over test_hard");
  sub->add_option("--manifest", o->manifest)->required();
  sub->add_option("--instances", o->instances, "Test instances")->required();
  sub->add_option("--out", o->out)->required();
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      const Json counts =
          HardLabelDistribution(ReadManifest(o->manifest), LoadInstances(o->instances));
      WriteText(o->out, counts.dump() + "\n");
      *ctx.out << counts.dump() << "\n";
    };
  });
}

// --- debias ---------------------------------------------------------------------

void AddDebiasWeights(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string scores, out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("debias-weights", "Self-debiasing example weights");
  sub->add_option("--biased-scores", o->scores, "Shallow-model confidences")->required();
  sub->add_option("--out", o->out)->required();
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      const auto weights = SelfDebiasWeights(LoadScores(o->scores, "confidence"));
      WriteWeights(weights, o->out);
      *ctx.out << "weights: " << weights.size() << " (" << kSelfDebiasFormula << ")\n";
    };
  });
}

void AddAmbiguous(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string variability, out;
    double fraction = 0.33;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("ambiguous", "Most variable ids (training filter)");
  sub->add_option("--variability", o->variability)->required();
  sub->add_option("--fraction", o->fraction);
  sub->add_option("--out", o->out)->required();
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      const ScoreTable scores = LoadScores(o->variability, "variability");
      const IdSet ids = AmbiguousFilter(scores, o->fraction);
      WriteIdList(ids, o->out);
      *ctx.out << "ambiguous: " << ids.size() << " of " << scores.size() << "\n";
    };
  });
}

// --- dataio utilities -----------------------------------------------------------

void AddProject(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string instances, out;
    std::vector<std::string> keep;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("project", "Partial-input view keeping only some fields");
  sub->add_option("--instances", o->instances)->required();
  sub->add_option("--keep", o->keep, "Fields to keep, in order")->required()->delimiter(',');
  sub->add_option("--out", o->out)->required();
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      const InstanceTable t = ProjectPartialInput(LoadInstances(o->instances), o->keep);
      WriteInstances(t, o->out);
      *ctx.out << "projected: " << t.size() << " records\n";
    };
  });
}

void AddValidate(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string kind, path, ids;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("validate", "Load a file and report what it holds");
  sub->add_option("kind", o->kind)
      ->required()
      ->check(CLI::IsMember({"instances", "dynamics", "embeddings", "manifest", "predictions",
                             "scores", "assignment", "weights", "ids"}));
  sub->add_option("path", o->path)->required();
  sub->add_option("--ids", o->ids, "Embedding id sidecar");
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      std::ostream& out = *ctx.out;
      const std::string& k = o->kind;
      if (k == "instances") {
        const InstanceTable t = LoadInstances(o->path);
        out << "instances: " << t.size() << " records, " << t.labels().size() << " labels, "
            << t.field_names().size() << " fields\n";
      } else if (k == "dynamics") {
        const DynamicsLog log = LoadDynamics(o->path);
        out << "dynamics: " << log.size() << " records, " << log.epoch_count() << " epochs\n";
      } else if (k == "embeddings") {
        const EmbeddingSet e = LoadMatrix(o->path, o->ids);
        out << "embeddings: " << e.rows() << " x " << e.dim() << "\n";
      } else if (k == "manifest") {
        const SplitManifest m = ReadManifest(o->path);
        out << "manifest: " << SplitMethodName(m.method) << ", train " << m.train_easy.size()
            << "/" << m.train_hard.size() << ", test " << m.test_easy.size() << "/"
            << m.test_hard.size() << " (easy/hard)\n";
      } else if (k == "predictions") {
        out << "predictions: " << LoadPredictions(o->path).records().size() << " records\n";
      } else if (k == "scores") {
        out << "scores: " << LoadScores(o->path).size() << " records\n";
      } else if (k == "assignment") {
        const ClusterAssignment a = LoadAssignment(o->path);
        out << "assignment: " << a.ids.size() << " ids, k = " << a.k << "\n";
      } else if (k == "weights") {
        out << "weights: " << LoadWeights(o->path).size() << " records\n";
      } else {
        out << "ids: " << LoadIdList(o->path).size() << "\n";
      }
    };
  });
}

void AddDigest(CLI::App& app, Context& ctx) {
  auto paths = std::make_shared<std::vector<std::string>>();
  auto* sub = app.add_subcommand("digest", "Content digest of files");
  sub->add_option("paths", *paths)->required();
  sub->callback([paths, &ctx] {
    ctx.action = [paths, &ctx] {
      for (const auto& p : *paths) *ctx.out << FileDigest(p) << "  " << p << "\n";
    };
  });
}

// --- simlab ---------------------------------------------------------------------

void AddSimlab(CLI::App& app, Context& ctx) {
  auto* lab = app.add_subcommand("simlab", "Synthetic datasets and end-to-end scenarios");
  lab->require_subcommand(1);

  {
    struct Opts {
      std::string config, out;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = lab->add_subcommand("generate", "Write a synthetic dataset");
    sub->add_option("--config", o->config, "Synthetic config (JSON); defaults when absent");
    sub->add_option("--out", o->out, "Output directory")->required();
    sub->callback([o, &ctx] {
      ctx.action = [o, &ctx] {
        const simlab::SynthConfig c = o->config.empty() ? simlab::SynthConfig{}
                                                        : simlab::ParseSynthConfig(LoadJson(o->config));
        const simlab::SynthDataset d = simlab::Generate(c);
        simlab::WriteSynthDataset(d, o->out);
        *ctx.out << "train " << d.train.size() << " (" << d.hard_train.size() << " planted hard), test "
                 << d.test.size() << " (" << d.hard_test.size() << ")\n";
      };
    });
  }

  {
    struct Opts {
      std::string probe, data, out, weights, subset, pseudo;
      std::vector<std::string> mask;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = lab->add_subcommand("train", "Train the probe and export its artifacts");
    sub->add_option("--probe", o->probe, "Probe config (JSON); defaults when absent");
    sub->add_option("--data", o->data, "Directory with train.jsonl and test.jsonl")->required();
    sub->add_option("--out", o->out, "Output directory")->required();
    sub->add_option("--mask", o->mask, "Numeric fields to zero")->delimiter(',');
    sub->add_option("--weights", o->weights, "Per-example loss weights");
    sub->add_option("--subset", o->subset, "Training ids to use");
    sub->add_option("--pseudo-labels", o->pseudo, "Train on these cluster ids instead");
    sub->callback([o, &ctx] {
      ctx.action = [o, &ctx] {
        const simlab::ProbeConfig config =
            o->probe.empty() ? simlab::ProbeConfig{} : simlab::ParseProbeConfig(LoadJson(o->probe));
        const fs::path data(o->data);
        const InstanceTable train = LoadInstances(data / "train.jsonl");
        const InstanceTable test = LoadInstances(data / "test.jsonl");
        simlab::ProbeOptions options;
        options.mask_fields = o->mask;
        if (!o->weights.empty()) {
          for (const auto& w : LoadWeights(o->weights)) options.weights[w.id] = w.weight;
        }
        if (!o->subset.empty()) options.train_subset = LoadIdList(o->subset);
        ClusterAssignment pseudo;
        if (!o->pseudo.empty()) {
          pseudo = LoadAssignment(o->pseudo);
          options.label_override = &pseudo;
        }
        const simlab::ProbeOutput r = simlab::TrainProbe(train, test, config, options);
        const fs::path out(o->out);
        fs::create_directories(out);
        WriteDynamics(r.train_dynamics, out / "train_dynamics.jsonl");
        if (r.test_dynamics) WriteDynamics(*r.test_dynamics, out / "test_dynamics.jsonl");
        WriteEmbeddings(r.train_hidden, out / "train_hidden.bae");
        WriteEmbeddings(r.test_hidden, out / "test_hidden.bae");
        WriteEmbeddings(r.train_logits, out / "train_logits.bae");
        WriteEmbeddings(r.test_logits, out / "test_logits.bae");
        WritePredictions(r.train_predictions, out / "train_predictions.jsonl");
        WritePredictions(r.test_predictions, out / "test_predictions.jsonl");
        *ctx.out << "final loss " << Fixed(r.epoch_loss.back(), 6);
        if (!options.label_override) {
          *ctx.out << ", test accuracy " << Fixed(simlab::TableAccuracy(r.test_predictions, test), 4);
        }
        *ctx.out << "\n";
      };
    });
  }

  {
    struct Opts {
      std::string spec, out, diagnostics, manifests, table, curves;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = lab->add_subcommand("scenario", "Run splits, probes and the drop report");
    sub->add_option("--spec", o->spec, "Scenario spec (JSON); defaults when absent");
    sub->add_option("--out", o->out, "Canonical JSON report")->required();
    sub->add_option("--diagnostics", o->diagnostics);
    sub->add_option("--manifest-dir", o->manifests, "Receives <method>.json");
    sub->add_option("--table", o->table);
    sub->add_option("--curves", o->curves);
    sub->callback([o, &ctx] {
      ctx.action = [o, &ctx] {
        const simlab::ScenarioSpec spec =
            o->spec.empty() ? simlab::ScenarioSpec{} : simlab::ParseScenarioSpec(LoadJson(o->spec));
        const simlab::ScenarioResult r = simlab::RunScenario(spec);
        WriteText(o->out, SerializeReport(r.report));
        if (!o->diagnostics.empty()) WriteText(o->diagnostics, r.diagnostics.dump() + "\n");
        if (!o->manifests.empty()) {
          for (const auto& [method, m] : r.manifests) {
            WriteManifest(m, fs::path(o->manifests) / (std::string(SplitMethodName(method)) + ".json"));
          }
        }
        if (!o->table.empty()) WriteText(o->table, ReportTable(r.report));
        if (!o->curves.empty()) WriteText(o->curves, CurvesCsv(r.report));
        *ctx.out << ReportTable(r.report);
      };
    });
  }

  {
    struct Opts {
      std::string grid, out;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = lab->add_subcommand("sweep", "Rank minority hyperparameters by drop");
    sub->add_option("--grid", o->grid, "Sweep grid (JSON)")->required();
    sub->add_option("--out", o->out, "Ranked CSV")->required();
    sub->callback([o, &ctx] {
      ctx.action = [o, &ctx] {
        const std::string csv = simlab::SweepCsv(simlab::Sweep(simlab::ParseSweepGrid(LoadJson(o->grid))));
        WriteText(o->out, csv);
        *ctx.out << csv;
      };
    });
  }
}

// --- pipeline -------------------------------------------------------------------

void AddRun(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string job;
    bool force = false;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("run", "Execute a job file");
  sub->add_option("job", o->job, "Job file (JSON)")->required();
  sub->add_flag("--force", o->force, "Ignore recorded state and run every step");
  sub->callback([o, &ctx] {
    ctx.action = [o, &ctx] {
      const int threads = ctx.threads;
      const uint64_t seed = ctx.seed;
      auto execute = [&](const std::vector<std::string>& step) {
        // Job-wide --threads/--seed apply unless the step sets its own.
        std::vector<std::string> args = {"--threads", std::to_string(threads), "--seed",
                                         std::to_string(seed)};
        args.insert(args.end(), step.begin(), step.end());
        return RunCli(args, *ctx.out, *ctx.err);
      };
      const PipelineReport r = RunPipeline(o->job, execute, o->force, *ctx.out);
      *ctx.out << "steps run: " << r.ran.size() << ", skipped: " << r.skipped.size() << "\n";
    };
  });
}

constexpr Setup kCommands[] = {
    AddCartography, AddSelectHard,   AddCluster,     AddPseudoLabels,  AddMinority,
    AddAssignTest,  AddMinorityTest, AddBuildSplit,  AddReconcile,     AddRandomBaseline,
    AddReinsert,    AddEvaluate,     AddReport,      AddDiversity,     AddHardLabels,
    AddDebiasWeights, AddAmbiguous,  AddProject,     AddValidate,      AddDigest,
    AddSimlab,      AddRun,
};

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  CLI::App app("Bias-amplified dataset splits: detection, construction and evaluation",
               "biasforge");
  app.set_version_flag("--version", VersionString());
  app.add_option("--threads", ctx.threads, "Worker threads (0 = all cores); never changes results")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", ctx.seed, "Seed for sampling and shuffles");
  app.require_subcommand(1);
  app.fallthrough();
  for (Setup setup : kCommands) setup(app, ctx);

  std::vector<std::string> argv_storage = {"biasforge"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  try {
    SetThreadCount(ctx.threads);
    if (ctx.action) ctx.action();
    return 0;
  } catch (const StepFailure& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace biasforge::cli
