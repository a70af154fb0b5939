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

#include <cmath>

#include "biasforge/errors.h"
#include "biasforge/parallel.h"
#include "biasforge/probe.h"
#include "biasforge/simlab.h"
#include "oracles/finite_difference.h"
#include "test_util.h"

namespace biasforge::simlab {
namespace {

SynthConfig Small(size_t n_train, size_t n_test, double beta, uint64_t seed = 1) {
  SynthConfig c;
  c.n_train = n_train;
  c.n_test = n_test;
  c.bias_rate = beta;
  c.seed = seed;
  return c;
}

const std::vector<double>& Numeric(const Instance& rec, size_t field) {
  return std::get<std::vector<double>>(rec.fields[field]);
}

TEST(GenerateTest, LayoutAndDeterminism) {
  const SynthDataset a = Generate(Small(50, 20, 0.8));
  const SynthDataset b = Generate(Small(50, 20, 0.8));
  EXPECT_EQ(SerializeInstances(a.train), SerializeInstances(b.train));
  EXPECT_EQ(SerializeInstances(a.test), SerializeInstances(b.test));
  EXPECT_EQ(a.hard_train, b.hard_train);
  EXPECT_NE(SerializeInstances(Generate(Small(50, 20, 0.8, 2)).train),
            SerializeInstances(a.train));
  EXPECT_EQ(a.train.records().front().id, "tr00000");
  EXPECT_EQ(a.test.records().back().id, "te00019");
  EXPECT_EQ(a.train.labels(), (LabelSet{"c0", "c1"}));
  EXPECT_EQ(a.train.field_names(), (std::vector<std::string>{"core", "spurious"}));
  for (const auto& rec : a.train.records()) {
    ASSERT_EQ(Numeric(rec, 0).size(), 40u);
    ASSERT_EQ(Numeric(rec, 1).size(), 1u);
    const double s = Numeric(rec, 1)[0];
    EXPECT_EQ(std::abs(s), 2.0);
    const bool aligned = (s > 0) == (rec.label == "c0");
    EXPECT_EQ(a.hard_train.contains(rec.id), !aligned);
  }
}

TEST(GenerateTest, OneHotSpuriousBlockForManyLabels) {
  SynthConfig c = Small(300, 10, 0.7);
  c.labels = 4;
  c.d_core = 4;
  const SynthDataset d = Generate(c);
  EXPECT_EQ(d.train.labels().size(), 4u);
  for (const auto& rec : d.train.records()) {
    const auto& s = Numeric(rec, 1);
    ASSERT_EQ(s.size(), 4u);
    size_t hot = 0, nonzero = 0;
    for (size_t j = 0; j < 4; ++j) {
      if (s[j] != 0.0) {
        hot = j;
        ++nonzero;
      }
    }
    ASSERT_EQ(nonzero, 1u);
    EXPECT_EQ(d.hard_train.contains(rec.id), "c" + std::to_string(hot) != rec.label);
  }
  c.d_core = 3;
  EXPECT_THROW(Generate(c), UsageError);
}

TEST(GenerateTest, PlantedHardFractionFollowsBiasRate) {
  EXPECT_TRUE(Generate(Small(10000, 100, 1.0)).hard_train.empty());
  for (double beta : {0.5, 0.9}) {
    const SynthDataset d = Generate(Small(10000, 10, beta));
    const double n = 10000;
    const double p = 1.0 - beta;
    const double sigma = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(static_cast<double>(d.hard_train.size()) / n, p, 5 * sigma) << beta;
  }
}

TEST(GenerateTest, RejectsInvalidConfig) {
  EXPECT_THROW(Generate(Small(10, 10, 0.4)), UsageError);
  SynthConfig c = Small(10, 10, 0.9);
  c.labels = 1;
  EXPECT_THROW(Generate(c), UsageError);
  EXPECT_THROW(ParseSynthConfig(Json{{"n_trian", 3}}), UsageError);
  EXPECT_THROW(ParseSynthConfig(Json{{"n_train", -3}}), UsageError);
  c.labels = 3;
  c.d_core = 5;
  EXPECT_EQ(ParseSynthConfig(SynthConfigToJson(c)), c);
}

using oracle::MaxRelativeGradientError;

TEST(ProbeTest, GradientMatchesFiniteDifferences) {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t d = 1 + rng.UniformIndex(6);
    const size_t h = 1 + rng.UniformIndex(6);
    const size_t classes = 2 + rng.UniformIndex(4);
    const size_t n = 1 + rng.UniformIndex(8);
    Mlp net(d, h, classes, rng);
    for (double& b : net.parameters()) b += 0.1 * rng.Normal();
    std::vector<double> x(n * d), w(n);
    std::vector<int> y(n);
    for (double& v : x) v = rng.Normal();
    for (size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng.UniformIndex(classes));
      w[i] = trial % 2 == 0 ? 1.0 : rng.Uniform();
    }
    EXPECT_LT(MaxRelativeGradientError(net, {x, y, w}), 1e-4) << "trial " << trial;
  }
}

TEST(ProbeTest, SoftmaxSumsToOne) {
  Rng rng(3);
  Mlp net(5, 7, 4, rng);
  for (double& p : net.parameters()) p *= 10.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(5), probs(4);
    for (double& v : x) v = 3.0 * rng.Normal();
    net.Forward(x.data(), nullptr, nullptr, probs.data());
    double sum = 0.0;
    for (double p : probs) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

InstanceTable BlobTable(size_t per_blob, uint64_t seed, const std::string& prefix) {
  const EmbeddingSet emb = testing::TwoBlobs(per_blob, 3, 12.0, 1.0, seed);
  std::vector<Instance> records;
  for (size_t i = 0; i < emb.rows(); ++i) {
    const auto row = emb.Row(i);
    records.push_back({prefix + emb.ids()[i], i % 2 == 0 ? "a" : "b",
                       {std::vector<double>(row.begin(), row.end())}});
  }
  return InstanceTable({"x"}, {"a", "b"}, std::move(records));
}

TEST(ProbeTest, SeparableBlobsReachPerfectTrainingAccuracy) {
  const InstanceTable train = BlobTable(60, 1, "tr");
  const InstanceTable test = BlobTable(20, 2, "te");
  ProbeConfig config;
  config.epochs = 20;
  config.learning_rate = 0.1;
  config.batch_size = 8;
  const ProbeOutput out = TrainProbe(train, test, config);
  EXPECT_EQ(TableAccuracy(out.train_predictions, train), 1.0);
  EXPECT_EQ(out.classes, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(out.train_dynamics.epoch_count(), 20u);
  EXPECT_EQ(out.test_dynamics->size(), 40u);
  EXPECT_EQ(out.train_hidden.dim(), config.hidden_dim);
  EXPECT_EQ(out.test_logits.dim(), 2u);
  EXPECT_LT(out.epoch_loss.back(), out.epoch_loss.front());
}

TEST(ProbeTest, ZeroLearningRateFreezesEveryEpoch) {
  const SynthDataset d = Generate(Small(200, 50, 0.9));
  ProbeConfig config;
  config.learning_rate = 0.0;
  config.epochs = 4;
  const ProbeOutput out = TrainProbe(d.train, d.test, config);
  for (const auto* log : {&out.train_dynamics, &*out.test_dynamics}) {
    for (const auto& rec : log->records()) {
      for (double p : rec.epochs) ASSERT_EQ(p, rec.epochs.front());
    }
  }
}

TEST(ProbeTest, ZeroWeightsLeaveTheNetworkUntouched) {
  const SynthDataset d = Generate(Small(100, 10, 0.9));
  ProbeConfig config;
  config.epochs = 2;
  ProbeOptions options;
  for (const auto& id : d.train.OrderedIds()) options.weights[id] = 0.0;
  const ProbeOutput out = TrainProbe(d.train, d.test, config, options);
  for (const auto& rec : out.train_dynamics.records()) {
    ASSERT_EQ(rec.epochs[0], rec.epochs[1]);
  }
  options.weights["nope"] = 1.0;
  EXPECT_THROW(TrainProbe(d.train, d.test, config, options), DataError);
}

TEST(ProbeTest, DeterministicAcrossRunsAndThreadCounts) {
  const SynthDataset d = Generate(Small(600, 200, 0.9));
  ProbeConfig config;
  config.seed = 9;
  auto digest = [&](int threads) {
    SetThreadCount(threads);
    const ProbeOutput out = TrainProbe(d.train, d.test, config);
    return SerializeDynamics(out.train_dynamics) + SerializeDynamics(*out.test_dynamics) +
           EncodeEmbeddingMatrix(out.train_hidden) + EncodeEmbeddingMatrix(out.test_hidden) +
           SerializePredictions(out.test_predictions);
  };
  const std::string one = digest(1);
  EXPECT_EQ(digest(1), one);
  EXPECT_EQ(digest(4), one);
  EXPECT_EQ(digest(8), one);
  SetThreadCount(0);
}

TEST(ProbeTest, MaskedCoreProbeTracksTheBiasRate) {
  // With the core features zeroed only the spurious sign is visible, so the
  // probe can do no better (and should do no worse) than predicting the
  // label the spurious feature points to.
  const SynthDataset d = Generate(Small(10000, 10000, 0.9, 5));
  ProbeOptions options;
  options.mask_fields = {kCoreField};
  const ProbeOutput out = TrainProbe(d.train, d.test, ProbeConfig{}, options);
  const double acc = TableAccuracy(out.test_predictions, d.test);
  const double aligned = 1.0 - static_cast<double>(d.hard_test.size()) / 10000.0;
  EXPECT_EQ(acc, aligned);
  EXPECT_NEAR(acc, 0.9, 5 * std::sqrt(0.9 * 0.1 / 10000.0));
}

TEST(ProbeTest, LabelOverrideTrainsOnClusterIds) {
  const SynthDataset d = Generate(Small(120, 30, 0.9));
  std::vector<int> clusters;
  for (size_t i = 0; i < 120; ++i) clusters.push_back(static_cast<int>(i % 7));
  const ClusterAssignment pseudo = testing::MakeAssignment(d.train.OrderedIds(), clusters, 7);
  ProbeOptions options;
  options.label_override = &pseudo;
  const ProbeOutput out = TrainProbe(d.train, d.test, ProbeConfig{}, options);
  EXPECT_EQ(out.classes.size(), 7u);
  EXPECT_EQ(out.train_logits.dim(), 7u);
  EXPECT_FALSE(out.test_dynamics.has_value());
  EXPECT_EQ(out.train_dynamics.records()[3].gold, "3");
  EXPECT_EQ(out.test_hidden.rows(), 30u);
}

TEST(ProbeTest, Errors) {
  const SynthDataset d = Generate(Small(64, 8, 0.9));
  ProbeConfig config;
  config.learning_rate = 1e300;
  try {
    TrainProbe(d.train, d.test, config);
    FAIL() << "expected a non-finite loss";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
  }
  ProbeConfig bad;
  bad.epochs = 0;
  EXPECT_THROW(TrainProbe(d.train, d.test, bad), UsageError);
  ProbeOptions subset;
  subset.train_subset = IdSet{"tr00001", "zz"};
  EXPECT_THROW(TrainProbe(d.train, d.test, ProbeConfig{}, subset), DataError);
  const InstanceTable text = testing::LabelTable({{"a", "x"}});
  EXPECT_THROW(ExtractFeatures(ParseInstances(
                   "{\"id\":\"a\",\"label\":\"x\",\"fields\":{\"t\":\"words\"}}\n")),
               DataError);
  EXPECT_THROW(ParseProbeConfig(Json{{"hidden", 3}}), UsageError);
  EXPECT_EQ(ParseProbeConfig(ProbeConfigToJson(config)), config);
}

}  // namespace
}  // namespace biasforge::simlab
