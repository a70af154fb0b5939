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

#ifndef BIASFORGE_PROBE_H_
#define BIASFORGE_PROBE_H_

// Small in-process classifier used by the synthetic lab: one tanh hidden
// layer, softmax output, minibatch SGD on (optionally weighted) cross-entropy.
// Emits the same artifacts an external fine-tuning run would: per-epoch gold
// probabilities, hidden-layer embeddings and argmax predictions.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "biasforge/cluster.h"
#include "biasforge/dataio.h"
#include "biasforge/random.h"

namespace biasforge::simlab {

struct ProbeConfig {
  size_t hidden_dim = 16;
  size_t epochs = 5;
  double learning_rate = 0.01;
  size_t batch_size = 32;
  uint64_t seed = 0;

  // Throws UsageError.
  void Validate() const;
  friend bool operator==(const ProbeConfig&, const ProbeConfig&) = default;
};

// Unknown keys are rejected; missing keys keep their defaults.
ProbeConfig ParseProbeConfig(const Json& doc);
Json ProbeConfigToJson(const ProbeConfig& config);

// Parameters live in one flat vector: W1 (hidden x input, row-major), b1,
// W2 (classes x hidden, row-major), b2.
class Mlp {
 public:
  // W1 ~ N(0, 1/input), W2 ~ N(0, 1/hidden), biases zero; drawn in layout
  // order from `rng`.
  Mlp(size_t input_dim, size_t hidden_dim, size_t classes, Rng& rng);

  size_t input_dim() const { return input_dim_; }
  size_t hidden_dim() const { return hidden_dim_; }
  size_t classes() const { return classes_; }
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  // Any output pointer may be null. `probs` is a max-shifted softmax.
  void Forward(const double* x, double* hidden, double* logits,
               double* probs) const;

 private:
  size_t input_dim_;
  size_t hidden_dim_;
  size_t classes_;
  std::vector<double> params_;
};

// A minibatch: rows of `x` (input_dim each), class targets, optional weights
// (empty = all ones).
struct Batch {
  std::span<const double> x;
  std::span<const int> y;
  std::span<const double> w;
};

// (1/|batch|) * sum_i w_i * -log p(y_i | x_i).
double BatchLoss(const Mlp& net, const Batch& batch);
// Gradient of BatchLoss with respect to parameters(); returns the loss.
double BatchGradient(const Mlp& net, const Batch& batch, std::vector<double>& grad);

// Concatenation of every numeric field in schema order; fields named in
// `mask_fields` are zeroed (the partial-input view). Text fields raise
// DataError.
struct FeatureMatrix {
  std::vector<std::string> ids;
  size_t dim = 0;
  std::vector<double> values;
};
FeatureMatrix ExtractFeatures(const InstanceTable& table,
                              std::span<const std::string> mask_fields = {});

struct ProbeOptions {
  std::vector<std::string> mask_fields;
  // Training rows, taken in table order. All training rows when absent.
  std::optional<IdSet> train_subset;
  // Per-example loss weights for training ids; missing ids weigh 1.
  std::unordered_map<std::string, double> weights;
  // Train on cluster indices instead of gold labels. Test-side dynamics are
  // then undefined and omitted.
  const ClusterAssignment* label_override = nullptr;
};

struct ProbeOutput {
  // Gold (or override) label names in class-index order.
  std::vector<std::string> classes;
  DynamicsLog train_dynamics;
  std::optional<DynamicsLog> test_dynamics;
  EmbeddingSet train_hidden;
  EmbeddingSet test_hidden;
  EmbeddingSet train_logits;
  EmbeddingSet test_logits;
  PredictionFile train_predictions;
  PredictionFile test_predictions;
  // Mean weighted training loss per epoch.
  std::vector<double> epoch_loss;
};

// Deterministic per (tables, config, options). Evaluation rows are processed
// independently, so the thread count never changes the output. Throws
// DataError when training diverges (non-finite loss or parameters, logits
// beyond the float range), naming the epoch.
ProbeOutput TrainProbe(const InstanceTable& train, const InstanceTable& test,
                       const ProbeConfig& config, const ProbeOptions& options = {});

// Accuracy of `preds` against the gold labels of every row of `table`.
double TableAccuracy(const PredictionFile& preds, const InstanceTable& table);

}  // namespace biasforge::simlab

#endif  // BIASFORGE_PROBE_H_
