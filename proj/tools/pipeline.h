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

#ifndef BIASFORGE_TOOLS_PIPELINE_H_
#define BIASFORGE_TOOLS_PIPELINE_H_

// Declarative multi-step jobs. A job file lists steps, each a subcommand
// invocation with its declared input and output paths:
//
//   {"steps": [{"name": "scores",
//               "run": ["cartography", "--dynamics", "dyn.jsonl",
//                       "--out", "scores.jsonl"],
//               "inputs": ["dyn.jsonl"], "outputs": ["scores.jsonl"]}]}
//
// A step depends on every step producing one of its inputs. Paths and
// commands are relative to the job file's directory. Completed steps are
// recorded in <job dir>/.biasforge/state.json and skipped on later runs while
// their command, input digests and output digests are unchanged.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace biasforge::cli {

struct PipelineStep {
  std::string name;
  std::vector<std::string> run;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

struct PipelineJob {
  std::vector<PipelineStep> steps;
};

// Throws UsageError for malformed jobs (unknown keys, duplicate names or
// outputs, a step invoking `run`).
PipelineJob ParseJob(const std::string& text);

// Step indices in execution order: dependencies first, otherwise file order.
// Throws UsageError naming the steps of a cycle.
std::vector<size_t> ExecutionOrder(const PipelineJob& job);

struct PipelineReport {
  std::vector<std::string> ran;
  std::vector<std::string> skipped;
};

// Runs one step's argument vector, returning its exit code.
using StepExecutor = std::function<int(const std::vector<std::string>&)>;

struct StepFailure : std::runtime_error {
  StepFailure(const std::string& what, int code) : std::runtime_error(what), exit_code(code) {}
  int exit_code;
};

inline constexpr char kStateDir[] = ".biasforge";
inline constexpr char kStateFile[] = "state.json";

// Throws DataError for a missing input and StepFailure when a step exits
// non-zero or leaves a declared output missing; that step's outputs are
// removed first.
PipelineReport RunPipeline(const std::filesystem::path& job_path, const StepExecutor& execute,
                           bool force, std::ostream& log);

}  // namespace biasforge::cli

#endif  // BIASFORGE_TOOLS_PIPELINE_H_
