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

#include "pipeline.h"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

#include "biasforge/dataio.h"
#include "biasforge/errors.h"

namespace biasforge::cli {

namespace fs = std::filesystem;

namespace {

std::string NormalPath(const std::string& p) {
  return fs::path(p).lexically_normal().generic_string();
}

std::vector<std::string> StringList(const Json& step, const char* key, const std::string& name) {
  std::vector<std::string> out;
  if (!step.contains(key)) return out;
  const Json& v = step.at(key);
  if (!v.is_array()) throw UsageError("job: step '" + name + "': '" + key + "' must be a list");
  for (const auto& item : v) {
    if (!item.is_string() || item.get<std::string>().empty()) {
      throw UsageError("job: step '" + name + "': '" + key + "' entries must be non-empty strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

// Digest of a file, or of every file below a directory together with its
// relative path. Empty when the path does not exist.
std::string PathDigest(const fs::path& p) {
  if (fs::is_regular_file(p)) return FileDigest(p);
  if (!fs::is_directory(p)) return "";
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(p)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const auto& f : files) {
    listing += fs::relative(f, p).generic_string() + "\t" + FileDigest(f) + "\n";
  }
  return ContentDigest(listing);
}

class WorkingDirectory {
 public:
  explicit WorkingDirectory(const fs::path& dir) : saved_(fs::current_path()) {
    fs::current_path(dir);
  }
  ~WorkingDirectory() {
    std::error_code ec;
    fs::current_path(saved_, ec);
  }
  WorkingDirectory(const WorkingDirectory&) = delete;
  WorkingDirectory& operator=(const WorkingDirectory&) = delete;

 private:
  fs::path saved_;
};

Json LoadState(const fs::path& path, std::ostream& log) {
  if (!fs::exists(path)) return Json::object();
  try {
    Json state = Json::parse(ReadFile(path));
    if (state.is_object() && state.value("format_version", 0) == 1 &&
        state.contains("steps") && state["steps"].is_object()) {
      return state["steps"];
    }
  } catch (const Json::exception&) {
  }
  log << "pipeline: ignoring unreadable state file " << path.string() << "\n";
  return Json::object();
}

void SaveState(const fs::path& path, const Json& steps) {
  WriteFileAtomic(path, Json{{"format_version", 1}, {"steps", steps}}.dump(1) + "\n");
}

void RemoveOutputs(const fs::path& dir, const PipelineStep& step) {
  for (const auto& out : step.outputs) {
    std::error_code ec;
    fs::remove_all(dir / out, ec);
  }
}

}  // namespace

PipelineJob ParseJob(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw UsageError(std::string("job: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("job: top level must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "steps") throw UsageError("job: unknown key '" + key + "'");
  }
  PipelineJob job;
  if (!doc.contains("steps")) return job;
  if (!doc["steps"].is_array()) throw UsageError("job: 'steps' must be a list");
  std::set<std::string> names;
  std::map<std::string, std::string> producer;
  for (const auto& s : doc["steps"]) {
    if (!s.is_object()) throw UsageError("job: every step must be an object");
    for (const auto& [key, _] : s.items()) {
      if (key != "name" && key != "run" && key != "inputs" && key != "outputs") {
        throw UsageError("job: unknown step key '" + key + "'");
      }
    }
    if (!s.contains("name") || !s["name"].is_string() || s["name"].get<std::string>().empty()) {
      throw UsageError("job: every step needs a non-empty 'name'");
    }
    PipelineStep step;
    step.name = s["name"].get<std::string>();
    if (!names.insert(step.name).second) {
      throw UsageError("job: duplicate step name '" + step.name + "'");
    }
    step.run = StringList(s, "run", step.name);
    if (step.run.empty()) throw UsageError("job: step '" + step.name + "' has an empty 'run'");
    if (step.run.front() == "run") {
      throw UsageError("job: step '" + step.name + "' cannot invoke 'run'");
    }
    for (auto& p : StringList(s, "inputs", step.name)) step.inputs.push_back(NormalPath(p));
    for (auto& p : StringList(s, "outputs", step.name)) {
      step.outputs.push_back(NormalPath(p));
      auto [it, fresh] = producer.emplace(step.outputs.back(), step.name);
      if (!fresh) {
        throw UsageError("job: output '" + it->first + "' is produced by both '" + it->second +
                         "' and '" + step.name + "'");
      }
    }
    job.steps.push_back(std::move(step));
  }
  return job;
}

std::vector<size_t> ExecutionOrder(const PipelineJob& job) {
  const size_t n = job.steps.size();
  std::map<std::string, size_t> producer;
  for (size_t i = 0; i < n; ++i) {
    for (const auto& out : job.steps[i].outputs) producer[out] = i;
  }
  std::vector<std::set<size_t>> deps(n);
  for (size_t i = 0; i < n; ++i) {
    for (const auto& in : job.steps[i].inputs) {
      auto it = producer.find(in);
      if (it != producer.end()) deps[i].insert(it->second);
    }
  }
  std::vector<size_t> order;
  std::vector<bool> done(n, false);
  while (order.size() < n) {
    bool progressed = false;
    for (size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      const bool ready = std::all_of(deps[i].begin(), deps[i].end(),
                                     [&](size_t d) { return done[d]; });
      if (ready) {
        done[i] = true;
        order.push_back(i);
        progressed = true;
        break;
      }
    }
    if (progressed) continue;
    // Every remaining step waits on another remaining step; walk dependency
    // edges from the first one until a step repeats.
    size_t at = 0;
    while (done[at]) ++at;
    std::vector<size_t> path;
    std::vector<int> seen_at(n, -1);
    while (seen_at[at] < 0) {
      seen_at[at] = static_cast<int>(path.size());
      path.push_back(at);
      for (size_t d : deps[at]) {
        if (!done[d]) {
          at = d;
          break;
        }
      }
    }
    // path[seen_at[at]..] is the cycle, each step depending on the next;
    // print it in data-flow order from the earliest step in the file.
    std::vector<size_t> cycle(path.begin() + seen_at[at], path.end());
    std::reverse(cycle.begin(), cycle.end());
    std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
    std::string names;
    for (size_t c : cycle) names += job.steps[c].name + " -> ";
    names += job.steps[cycle.front()].name;
    throw UsageError("job: dependency cycle: " + names);
  }
  return order;
}

PipelineReport RunPipeline(const fs::path& job_path, const StepExecutor& execute, bool force,
                           std::ostream& log) {
  const PipelineJob job = ParseJob(ReadFile(job_path));
  const std::vector<size_t> order = ExecutionOrder(job);
  const fs::path dir = fs::absolute(job_path).parent_path();

  std::set<std::string> produced;
  for (const auto& step : job.steps) produced.insert(step.outputs.begin(), step.outputs.end());
  for (const auto& step : job.steps) {
    for (const auto& in : step.inputs) {
      if (!produced.contains(in) && !fs::exists(dir / in)) {
        throw DataError("job: step '" + step.name + "' input '" + in +
                        "' does not exist and no step produces it");
      }
    }
  }

  PipelineReport report;
  if (job.steps.empty()) return report;
  const fs::path state_path = dir / kStateDir / kStateFile;
  Json state = force ? Json::object() : LoadState(state_path, log);

  for (size_t index : order) {
    const PipelineStep& step = job.steps[index];
    Json input_digests = Json::object();
    for (const auto& in : step.inputs) input_digests[in] = PathDigest(dir / in);
    const std::string key =
        ContentDigest(Json{{"run", step.run}, {"inputs", input_digests}}.dump());

    if (state.contains(step.name) && state[step.name].value("key", "") == key) {
      const Json& recorded = state[step.name]["outputs"];
      bool intact = recorded.is_object() && recorded.size() == step.outputs.size();
      for (const auto& out : step.outputs) {
        if (!intact) break;
        const std::string digest = PathDigest(dir / out);
        intact = !digest.empty() && recorded.value(out, "") == digest;
      }
      if (intact) {
        log << "skip " << step.name << "\n";
        report.skipped.push_back(step.name);
        continue;
      }
    }

    log << "run  " << step.name << "\n";
    state.erase(step.name);
    SaveState(state_path, state);
    int code = 0;
    try {
      WorkingDirectory cwd(dir);
      code = execute(step.run);
    } catch (...) {
      RemoveOutputs(dir, step);
      throw;
    }
    if (code != 0) {
      RemoveOutputs(dir, step);
      throw StepFailure("job: step '" + step.name + "' failed with exit code " +
                            std::to_string(code),
                        code);
    }
    Json outputs = Json::object();
    for (const auto& out : step.outputs) {
      const std::string digest = PathDigest(dir / out);
      if (digest.empty()) {
        RemoveOutputs(dir, step);
        throw StepFailure("job: step '" + step.name + "' did not produce '" + out + "'", 2);
      }
      outputs[out] = digest;
    }
    state[step.name] = Json{{"key", key}, {"outputs", outputs}};
    SaveState(state_path, state);
    report.ran.push_back(step.name);
  }
  return report;
}

}  // namespace biasforge::cli
