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

#include "biasforge/errors.h"
#include "biasforge/random.h"
#include "biasforge/simlab.h"
#include "config_reader.h"

namespace biasforge::simlab {

void SynthConfig::Validate() const {
  if (n_train < 1) throw UsageError("synth: n_train must be >= 1");
  if (labels < 2) throw UsageError("synth: at least two labels are required");
  if (d_core < 1) throw UsageError("synth: d_core must be >= 1");
  if (labels > 2 && d_core < labels) {
    throw UsageError("synth: d_core must be >= labels when labels > 2");
  }
  if (!(bias_rate >= 0.5 && bias_rate <= 1.0)) {
    throw UsageError("synth: bias_rate must lie in [0.5, 1]");
  }
  for (double v : {core_separation, noise_sigma, spurious_scale}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw UsageError("synth: separations, noise and scales must be finite and >= 0");
    }
  }
}

SynthConfig ParseSynthConfig(const Json& doc) {
  SynthConfig c;
  internal::ConfigReader r(doc, "synth config");
  r.Read("n_train", c.n_train);
  r.Read("n_test", c.n_test);
  r.Read("labels", c.labels);
  r.Read("d_core", c.d_core);
  r.Read("core_separation", c.core_separation);
  r.Read("noise_sigma", c.noise_sigma);
  r.Read("bias_rate", c.bias_rate);
  r.Read("spurious_scale", c.spurious_scale);
  r.Read("seed", c.seed);
  r.Finish();
  c.Validate();
  return c;
}

Json SynthConfigToJson(const SynthConfig& c) {
  return Json{{"n_train", c.n_train},
              {"n_test", c.n_test},
              {"labels", c.labels},
              {"d_core", c.d_core},
              {"core_separation", c.core_separation},
              {"noise_sigma", c.noise_sigma},
              {"bias_rate", c.bias_rate},
              {"spurious_scale", c.spurious_scale},
              {"seed", c.seed}};
}

namespace {

std::string Id(const char* prefix, size_t i, int width) {
  std::string digits = std::to_string(i);
  if (digits.size() < static_cast<size_t>(width)) {
    digits.insert(0, static_cast<size_t>(width) - digits.size(), '0');
  }
  return prefix + digits;
}

int IdWidth(size_t n) {
  int width = 1;
  for (size_t v = n > 0 ? n - 1 : 0; v >= 10; v /= 10) ++width;
  return std::max(width, 5);
}

struct Split {
  std::vector<Instance> records;
  IdSet hard;
};

Split Draw(const SynthConfig& c, const std::vector<std::vector<double>>& means,
           const std::vector<std::string>& names, size_t n, const char* prefix, Rng& rng) {
  const size_t labels = c.labels;
  const int width = IdWidth(n);
  Split out;
  out.records.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t y = static_cast<size_t>(rng.UniformIndex(labels));
    std::vector<double> core(c.d_core);
    for (size_t j = 0; j < c.d_core; ++j) core[j] = means[y][j] + c.noise_sigma * rng.Normal();
    const bool aligned = rng.Uniform() < c.bias_rate;
    size_t points_to = y;
    if (!aligned) {
      points_to = static_cast<size_t>(rng.UniformIndex(labels - 1));
      if (points_to >= y) ++points_to;
    }
    std::vector<double> spurious;
    if (labels == 2) {
      spurious.push_back(points_to == 0 ? c.spurious_scale : -c.spurious_scale);
    } else {
      spurious.assign(labels, 0.0);
      spurious[points_to] = c.spurious_scale;
    }
    Instance rec{Id(prefix, i, width), names[y], {std::move(core), std::move(spurious)}};
    if (!aligned) out.hard.insert(rec.id);
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

SynthDataset Generate(const SynthConfig& c) {
  c.Validate();
  std::vector<std::string> names;
  for (size_t y = 0; y < c.labels; ++y) names.push_back("c" + std::to_string(y));
  // Pairwise distance core_separation between every two class means.
  std::vector<std::vector<double>> means(c.labels, std::vector<double>(c.d_core, 0.0));
  if (c.d_core >= c.labels) {
    for (size_t y = 0; y < c.labels; ++y) means[y][y] = c.core_separation / std::sqrt(2.0);
  } else {
    means[0][0] = c.core_separation / 2;
    means[1][0] = -c.core_separation / 2;
  }
  Rng rng(c.seed);
  Split train = Draw(c, means, names, c.n_train, "tr", rng);
  Split test = Draw(c, means, names, c.n_test, "te", rng);
  const std::vector<std::string> fields = {kCoreField, kSpuriousField};
  const LabelSet labels(names.begin(), names.end());
  return SynthDataset{InstanceTable(fields, labels, std::move(train.records)),
                      InstanceTable(fields, labels, std::move(test.records)),
                      std::move(train.hard), std::move(test.hard)};
}

void WriteSynthDataset(const SynthDataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  WriteInstances(data.train, dir / "train.jsonl");
  WriteInstances(data.test, dir / "test.jsonl");
  WriteIdList(data.hard_train, dir / "hard_train.txt");
  WriteIdList(data.hard_test, dir / "hard_test.txt");
}

}  // namespace biasforge::simlab
