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

#include <gtest/gtest.h>

#include <sstream>

#include "biasforge/cartography.h"
#include "biasforge/dataio.h"
#include "biasforge/errors.h"
#include "cli.h"
#include "pipeline.h"
#include "test_util.h"

namespace biasforge::cli {
namespace {

namespace fs = std::filesystem;

DynamicsLog SmallLog() {
  std::vector<DynamicsRecord> records;
  for (int i = 0; i < 20; ++i) {
    const double p = 0.05 * i;
    records.push_back({"i" + std::to_string(100 + i), i % 2 ? "a" : "b", {p, 1.0 - p / 2}});
  }
  return DynamicsLog(std::move(records));
}

// Cartography, then selection from its scores. The steps are listed in
// reverse so the order has to come from the dependency.
constexpr char kTwoStepJob[] = R"({"steps": [
  {"name": "select", "run": ["select-hard", "--scores", "out/scores.jsonl", "--q", "25",
                               "--out", "out/hard.txt"],
   "inputs": ["out/scores.jsonl"], "outputs": ["out/hard.txt"]},
  {"name": "scores", "run": ["cartography", "--dynamics", "dyn.jsonl", "--out",
                               "out/scores.jsonl"],
   "inputs": ["dyn.jsonl"], "outputs": ["out/scores.jsonl"]}]})";

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override { WriteDynamics(SmallLog(), dir_ / "dyn.jsonl"); }

  int Run(const std::string& job_text, std::vector<std::string> extra = {}) {
    WriteFileAtomic(dir_ / "job.json", job_text);
    std::vector<std::string> args = {"run", (dir_ / "job.json").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    std::ostringstream out, err;
    const int code = RunCli(args, out, err);
    log_ = out.str();
    err_ = err.str();
    return code;
  }

  testing::TempDir dir_;
  std::string log_;
  std::string err_;
};

TEST_F(PipelineTest, EmptyJobSucceedsWithoutOutputs) {
  EXPECT_EQ(Run("{}"), 0) << err_;
  EXPECT_EQ(Run(R"({"steps": []})"), 0) << err_;
  size_t entries = 0;
  for (const auto& e : fs::directory_iterator(dir_.path())) entries += e.path().filename() != "dyn.jsonl";
  EXPECT_EQ(entries, 1u);  // job.json only
}

TEST_F(PipelineTest, TwoStepJobProducesScoresThenIds) {
  ASSERT_EQ(Run(kTwoStepJob), 0) << err_;
  EXPECT_EQ(log_.find("run  scores"), 0u) << log_;
  EXPECT_NE(log_.find("run  select"), std::string::npos);
  const ScoreTable scores = Confidence(SmallLog());
  EXPECT_EQ(ReadFile(dir_ / "out/scores.jsonl"), SerializeScores(scores));
  EXPECT_EQ(ReadFile(dir_ / "out/hard.txt"), SerializeIdList(SelectHard(scores, 25)));
  EXPECT_TRUE(fs::exists(dir_ / kStateDir / kStateFile));
}

TEST_F(PipelineTest, UnchangedInputsSkipEveryStep) {
  ASSERT_EQ(Run(kTwoStepJob), 0) << err_;
  const std::string hard = ReadFile(dir_ / "out/hard.txt");
  ASSERT_EQ(Run(kTwoStepJob), 0) << err_;
  EXPECT_NE(log_.find("skip scores"), std::string::npos) << log_;
  EXPECT_NE(log_.find("skip select"), std::string::npos);
  EXPECT_NE(log_.find("steps run: 0, skipped: 2"), std::string::npos);

  // A lost output reruns only its own step; the rerun reproduces the bytes,
  // so the downstream step stays skipped.
  fs::remove(dir_ / "out/scores.jsonl");
  ASSERT_EQ(Run(kTwoStepJob), 0) << err_;
  EXPECT_NE(log_.find("run  scores"), std::string::npos) << log_;
  EXPECT_NE(log_.find("skip select"), std::string::npos);

  // A changed input reruns everything downstream of it.
  WriteDynamics(DynamicsLog(std::vector<DynamicsRecord>{{"z", "a", {0.5, 0.5}},
                                                         {"y", "b", {0.1, 0.3}}}),
                dir_ / "dyn.jsonl");
  ASSERT_EQ(Run(kTwoStepJob), 0) << err_;
  EXPECT_NE(log_.find("steps run: 2"), std::string::npos) << log_;
  EXPECT_NE(ReadFile(dir_ / "out/hard.txt"), hard);

  // So does a changed command, and --force reruns regardless.
  std::string job = kTwoStepJob;
  job.replace(job.find("\"25\""), 4, "\"50\"");
  ASSERT_EQ(Run(job), 0) << err_;
  EXPECT_NE(log_.find("skip scores"), std::string::npos) << log_;
  EXPECT_NE(log_.find("run  select"), std::string::npos);
  ASSERT_EQ(Run(job, {"--force"}), 0) << err_;
  EXPECT_NE(log_.find("steps run: 2, skipped: 0"), std::string::npos) << log_;
}

TEST_F(PipelineTest, CycleIsReportedByStepName) {
  const int code = Run(R"({"steps": [
    {"name": "first", "run": ["digest", "x"], "inputs": ["c"], "outputs": ["a"]},
    {"name": "second", "run": ["digest", "x"], "inputs": ["a"], "outputs": ["b"]},
    {"name": "third", "run": ["digest", "x"], "inputs": ["b"], "outputs": ["c"]}]})");
  EXPECT_EQ(code, 1);
  EXPECT_NE(err_.find("cycle: first -> second -> third -> first"), std::string::npos) << err_;
  EXPECT_FALSE(fs::exists(dir_ / kStateDir));
}

TEST_F(PipelineTest, MissingInputFailsBeforeAnyStepRuns) {
  const int code = Run(R"({"steps": [
    {"name": "ok", "run": ["cartography", "--dynamics", "dyn.jsonl", "--out", "s.jsonl"],
     "inputs": ["dyn.jsonl"], "outputs": ["s.jsonl"]},
    {"name": "lost", "run": ["digest", "nowhere.txt"], "inputs": ["nowhere.txt"]}]})");
  EXPECT_EQ(code, 2);
  EXPECT_NE(err_.find("'lost' input 'nowhere.txt'"), std::string::npos) << err_;
  EXPECT_FALSE(fs::exists(dir_ / "s.jsonl"));
}

TEST_F(PipelineTest, FailedStepRemovesItsOutputsAndStops) {
  WriteFileAtomic(dir_ / "stale.txt", "left over\n");
  const int code = Run(R"({"steps": [
    {"name": "scores", "run": ["cartography", "--dynamics", "dyn.jsonl", "--out", "s.jsonl"],
     "inputs": ["dyn.jsonl"], "outputs": ["s.jsonl"]},
    {"name": "bad", "run": ["select-hard", "--scores", "s.jsonl", "--q", "500",
                            "--out", "stale.txt"],
     "inputs": ["s.jsonl"], "outputs": ["stale.txt"]},
    {"name": "after", "run": ["digest", "stale.txt"], "inputs": ["stale.txt"],
     "outputs": ["never.txt"]}]})");
  EXPECT_EQ(code, 1);
  EXPECT_NE(err_.find("step 'bad' failed with exit code 1"), std::string::npos) << err_;
  EXPECT_TRUE(fs::exists(dir_ / "s.jsonl"));
  EXPECT_FALSE(fs::exists(dir_ / "stale.txt"));
  EXPECT_EQ(log_.find("run  after"), std::string::npos);
  // The completed step is still recorded.
  const Json state = Json::parse(ReadFile(dir_ / kStateDir / kStateFile));
  EXPECT_TRUE(state["steps"].contains("scores"));
  EXPECT_FALSE(state["steps"].contains("bad"));
}

TEST_F(PipelineTest, UndeclaredOutputIsAFailure) {
  const int code = Run(R"({"steps": [
    {"name": "liar", "run": ["digest", "dyn.jsonl"], "inputs": ["dyn.jsonl"],
     "outputs": ["promised.txt"]}]})");
  EXPECT_EQ(code, 2);
  EXPECT_NE(err_.find("did not produce 'promised.txt'"), std::string::npos) << err_;
}

TEST_F(PipelineTest, DirectoryOutputsAreDigested) {
  SplitManifest m;
  m.train_easy = {"a", "b"};
  m.train_hard = {"c", "d"};
  WriteManifest(m, dir_ / "m.json");
  const std::string job = R"({"steps": [
    {"name": "curve", "run": ["reinsert", "--manifest", "m.json", "--fractions", "0.5,1",
                              "--out-dir", "re"],
     "inputs": ["m.json"], "outputs": ["re"]}]})";
  ASSERT_EQ(Run(job), 0) << err_;
  EXPECT_TRUE(fs::exists(dir_ / "re/reinsert_0.50.json"));
  ASSERT_EQ(Run(job), 0);
  EXPECT_NE(log_.find("skip curve"), std::string::npos);
  WriteFileAtomic(dir_ / "re/reinsert_0.50.json", "tampered");
  ASSERT_EQ(Run(job), 0);
  EXPECT_NE(log_.find("run  curve"), std::string::npos);
  EXPECT_EQ(ReadManifest(dir_ / "re/reinsert_0.50.json").train_easy.size(), 3u);
}

TEST(JobParsingTest, RejectsMalformedJobs) {
  EXPECT_THROW(ParseJob("[]"), UsageError);
  EXPECT_THROW(ParseJob(R"({"stages": []})"), UsageError);
  EXPECT_THROW(ParseJob(R"({"steps": [{"run": ["digest"]}]})"), UsageError);
  EXPECT_THROW(ParseJob(R"({"steps": [{"name": "a", "run": []}]})"), UsageError);
  EXPECT_THROW(ParseJob(R"({"steps": [{"name": "a", "run": ["run", "x.json"]}]})"), UsageError);
  EXPECT_THROW(ParseJob(R"({"steps": [{"name": "a", "run": ["digest"], "after": []}]})"),
               UsageError);
  EXPECT_THROW(ParseJob(R"({"steps": [{"name": "a", "run": ["digest"]},
                                       {"name": "a", "run": ["digest"]}]})"),
               UsageError);
  EXPECT_THROW(ParseJob(R"({"steps": [{"name": "a", "run": ["digest"], "outputs": ["x"]},
                                       {"name": "b", "run": ["digest"], "outputs": ["./x"]}]})"),
               UsageError);
}

TEST(JobParsingTest, OrderFollowsDependenciesThenFileOrder) {
  const PipelineJob job = ParseJob(R"({"steps": [
    {"name": "d", "run": ["x"], "inputs": ["b.out", "c.out"]},
    {"name": "b", "run": ["x"], "inputs": ["a.out"], "outputs": ["b.out"]},
    {"name": "a", "run": ["x"], "outputs": ["a.out"]},
    {"name": "c", "run": ["x"], "inputs": ["./a.out"], "outputs": ["c.out"]},
    {"name": "e", "run": ["x"]}]})");
  std::vector<std::string> names;
  for (size_t i : ExecutionOrder(job)) names.push_back(job.steps[i].name);
  EXPECT_EQ(names, (std::vector<std::string>{"a", "b", "c", "d", "e"}));

  const PipelineJob self = ParseJob(
      R"({"steps": [{"name": "loop", "run": ["x"], "inputs": ["f"], "outputs": ["f"]}]})");
  try {
    ExecutionOrder(self);
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("loop -> loop"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace biasforge::cli
