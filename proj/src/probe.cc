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

#include "biasforge/probe.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "biasforge/errors.h"
#include "config_reader.h"

namespace biasforge::simlab {

void ProbeConfig::Validate() const {
  if (hidden_dim < 1) throw UsageError("probe: hidden_dim must be >= 1");
  if (epochs < 1) throw UsageError("probe: epochs must be >= 1");
  if (batch_size < 1) throw UsageError("probe: batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw UsageError("probe: learning_rate must be finite and >= 0");
  }
}

ProbeConfig ParseProbeConfig(const Json& doc) {
  ProbeConfig c;
  internal::ConfigReader r(doc, "probe config");
  r.Read("hidden_dim", c.hidden_dim);
  r.Read("epochs", c.epochs);
  r.Read("learning_rate", c.learning_rate);
  r.Read("batch_size", c.batch_size);
  r.Read("seed", c.seed);
  r.Finish();
  c.Validate();
  return c;
}

Json ProbeConfigToJson(const ProbeConfig& c) {
  return Json{{"hidden_dim", c.hidden_dim},
              {"epochs", c.epochs},
              {"learning_rate", c.learning_rate},
              {"batch_size", c.batch_size},
              {"seed", c.seed}};
}

Mlp::Mlp(size_t input_dim, size_t hidden_dim, size_t classes, Rng& rng)
    : input_dim_(input_dim), hidden_dim_(hidden_dim), classes_(classes) {
  if (input_dim < 1 || hidden_dim < 1 || classes < 1) {
    throw UsageError("mlp: every layer needs at least one unit");
  }
  const size_t w1 = hidden_dim * input_dim;
  const size_t w2 = classes * hidden_dim;
  params_.assign(w1 + hidden_dim + w2 + classes, 0.0);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (size_t i = 0; i < w1; ++i) params_[i] = s1 * rng.Normal();
  double* p2 = params_.data() + w1 + hidden_dim;
  for (size_t i = 0; i < w2; ++i) p2[i] = s2 * rng.Normal();
}

namespace {

struct Layout {
  const double* w1;
  const double* b1;
  const double* w2;
  const double* b2;
};

Layout Split(const Mlp& net) {
  const double* p = net.parameters().data();
  const size_t w1 = net.hidden_dim() * net.input_dim();
  const size_t w2 = net.classes() * net.hidden_dim();
  return {p, p + w1, p + w1 + net.hidden_dim(),
          p + w1 + net.hidden_dim() + w2};
}

// Fills hidden and logits; returns log(sum(exp(logits))).
double ForwardCore(const Mlp& net, const double* x, double* hidden, double* logits) {
  const Layout l = Split(net);
  const size_t d = net.input_dim();
  const size_t h = net.hidden_dim();
  for (size_t j = 0; j < h; ++j) {
    const double* row = l.w1 + j * d;
    double a = l.b1[j];
    for (size_t k = 0; k < d; ++k) a += row[k] * x[k];
    hidden[j] = std::tanh(a);
  }
  double top = -INFINITY;
  for (size_t c = 0; c < net.classes(); ++c) {
    const double* row = l.w2 + c * h;
    double z = l.b2[c];
    for (size_t j = 0; j < h; ++j) z += row[j] * hidden[j];
    logits[c] = z;
    top = std::max(top, z);
  }
  double sum = 0.0;
  for (size_t c = 0; c < net.classes(); ++c) sum += std::exp(logits[c] - top);
  return top + std::log(sum);
}

void CheckBatch(const Mlp& net, const Batch& b) {
  const size_t n = b.y.size();
  if (n == 0 || b.x.size() != n * net.input_dim() ||
      (!b.w.empty() && b.w.size() != n)) {
    throw UsageError("mlp: inconsistent batch shapes");
  }
}

}  // namespace

void Mlp::Forward(const double* x, double* hidden, double* logits,
                  double* probs) const {
  std::vector<double> hbuf(hidden == nullptr ? hidden_dim_ : 0);
  std::vector<double> zbuf(logits == nullptr ? classes_ : 0);
  double* hp = hidden != nullptr ? hidden : hbuf.data();
  double* zp = logits != nullptr ? logits : zbuf.data();
  const double lse = ForwardCore(*this, x, hp, zp);
  if (probs != nullptr) {
    for (size_t c = 0; c < classes_; ++c) probs[c] = std::exp(zp[c] - lse);
  }
}

double BatchLoss(const Mlp& net, const Batch& b) {
  CheckBatch(net, b);
  std::vector<double> hidden(net.hidden_dim()), logits(net.classes());
  const size_t n = b.y.size();
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double lse =
        ForwardCore(net, b.x.data() + i * net.input_dim(), hidden.data(), logits.data());
    const double w = b.w.empty() ? 1.0 : b.w[i];
    loss += w * (lse - logits[static_cast<size_t>(b.y[i])]);
  }
  return loss / static_cast<double>(n);
}

double BatchGradient(const Mlp& net, const Batch& b, std::vector<double>& grad) {
  CheckBatch(net, b);
  const size_t d = net.input_dim();
  const size_t h = net.hidden_dim();
  const size_t classes = net.classes();
  grad.assign(net.parameters().size(), 0.0);
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + h * d;
  double* g_w2 = g_b1 + h;
  double* g_b2 = g_w2 + classes * h;
  const Layout l = Split(net);

  std::vector<double> hidden(h), logits(classes), dz(classes), da(h);
  const size_t n = b.y.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double* x = b.x.data() + i * d;
    const double lse = ForwardCore(net, x, hidden.data(), logits.data());
    const size_t y = static_cast<size_t>(b.y[i]);
    const double s = (b.w.empty() ? 1.0 : b.w[i]) * inv_n;
    loss += s * (lse - logits[y]);
    for (size_t c = 0; c < classes; ++c) {
      dz[c] = s * (std::exp(logits[c] - lse) - (c == y ? 1.0 : 0.0));
      g_b2[c] += dz[c];
      double* row = g_w2 + c * h;
      for (size_t j = 0; j < h; ++j) row[j] += dz[c] * hidden[j];
    }
    for (size_t j = 0; j < h; ++j) {
      double back = 0.0;
      for (size_t c = 0; c < classes; ++c) back += dz[c] * l.w2[c * h + j];
      da[j] = back * (1.0 - hidden[j] * hidden[j]);
      g_b1[j] += da[j];
      double* row = g_w1 + j * d;
      for (size_t k = 0; k < d; ++k) row[k] += da[j] * x[k];
    }
  }
  return loss;
}

FeatureMatrix ExtractFeatures(const InstanceTable& table,
                              std::span<const std::string> mask_fields) {
  for (const auto& name : mask_fields) {
    if (!table.FieldIndex(name)) throw DataError("features: unknown field '" + name + "'");
  }
  const auto& names = table.field_names();
  std::vector<bool> masked(names.size(), false);
  for (size_t f = 0; f < names.size(); ++f) {
    masked[f] = std::find(mask_fields.begin(), mask_fields.end(), names[f]) !=
                mask_fields.end();
  }
  FeatureMatrix out;
  out.ids = table.OrderedIds();
  std::vector<size_t> widths;
  for (const auto& rec : table.records()) {
    std::vector<size_t> row_widths;
    for (size_t f = 0; f < rec.fields.size(); ++f) {
      const auto* vec = std::get_if<std::vector<double>>(&rec.fields[f]);
      if (vec == nullptr) {
        throw DataError("features: field '" + names[f] + "' of '" + rec.id +
                        "' is text, not numeric");
      }
      row_widths.push_back(vec->size());
      for (double v : *vec) out.values.push_back(masked[f] ? 0.0 : v);
    }
    if (widths.empty()) {
      widths = row_widths;
    } else if (widths != row_widths) {
      throw DataError("features: ragged numeric fields at '" + rec.id + "'");
    }
  }
  out.dim = std::accumulate(widths.begin(), widths.end(), size_t{0});
  if (out.dim == 0 && !out.ids.empty()) throw DataError("features: no numeric fields");
  return out;
}

namespace {

std::vector<int> ClassTargets(const InstanceTable& table,
                              const std::map<std::string, int>& class_of) {
  std::vector<int> y;
  y.reserve(table.size());
  for (const auto& rec : table.records()) {
    auto it = class_of.find(rec.label);
    if (it == class_of.end()) {
      throw DataError("probe: label '" + rec.label + "' of '" + rec.id +
                      "' is not a training label");
    }
    y.push_back(it->second);
  }
  return y;
}

constexpr double kFloatMax = std::numeric_limits<float>::max();

struct Evaluation {
  std::vector<double> gold_prob;
  std::vector<float> hidden;
  std::vector<float> logits;
  std::vector<int> argmax;
  // Some logit left the float range (or is NaN).
  bool overflow = false;
};

// Per-row forward passes; rows are independent so any schedule gives the
// same bytes.
Evaluation Evaluate(const Mlp& net, const FeatureMatrix& f,
                    const std::vector<int>* gold, bool keep_representations) {
  const size_t n = f.ids.size();
  const size_t h = net.hidden_dim();
  const size_t classes = net.classes();
  Evaluation ev;
  ev.gold_prob.resize(gold != nullptr ? n : 0);
  ev.argmax.resize(n);
  if (keep_representations) {
    ev.hidden.resize(n * h);
    ev.logits.resize(n * classes);
  }
  bool overflow = false;
#pragma omp parallel reduction(|| : overflow)
  {
    std::vector<double> hidden(h), logits(classes), probs(classes);
#pragma omp for schedule(static)
    for (long li = 0; li < static_cast<long>(n); ++li) {
      const size_t i = static_cast<size_t>(li);
      net.Forward(f.values.data() + i * f.dim, hidden.data(), logits.data(), probs.data());
      for (double z : logits) overflow = overflow || !(std::abs(z) <= kFloatMax);
      if (gold != nullptr) ev.gold_prob[i] = probs[static_cast<size_t>((*gold)[i])];
      ev.argmax[i] = static_cast<int>(
          std::max_element(logits.begin(), logits.end()) - logits.begin());
      if (keep_representations) {
        for (size_t j = 0; j < h; ++j) ev.hidden[i * h + j] = static_cast<float>(hidden[j]);
        for (size_t c = 0; c < classes; ++c) {
          ev.logits[i * classes + c] = static_cast<float>(logits[c]);
        }
      }
    }
  }
  ev.overflow = overflow;
  return ev;
}

PredictionFile Predictions(const std::vector<std::string>& ids,
                           const std::vector<int>& argmax,
                           const std::vector<std::string>& classes) {
  std::vector<Prediction> out;
  out.reserve(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) {
    out.push_back({ids[i], classes[static_cast<size_t>(argmax[i])]});
  }
  return PredictionFile(std::move(out));
}

DynamicsLog BuildDynamics(const std::vector<std::string>& ids, const std::vector<int>& gold,
                          const std::vector<std::string>& classes,
                          const std::vector<std::vector<double>>& per_epoch) {
  std::vector<DynamicsRecord> records(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) {
    records[i].id = ids[i];
    records[i].gold = classes[static_cast<size_t>(gold[i])];
    records[i].epochs.reserve(per_epoch.size());
    for (const auto& epoch : per_epoch) {
      // Rounding in exp may overshoot by an ulp.
      records[i].epochs.push_back(std::clamp(epoch[i], 0.0, 1.0));
    }
  }
  return DynamicsLog(std::move(records));
}

}  // namespace

ProbeOutput TrainProbe(const InstanceTable& train, const InstanceTable& test,
                       const ProbeConfig& config, const ProbeOptions& options) {
  config.Validate();
  const FeatureMatrix train_x = ExtractFeatures(train, options.mask_fields);
  const FeatureMatrix test_x = ExtractFeatures(test, options.mask_fields);
  if (train_x.ids.empty()) throw DataError("probe: empty training table");
  if (!test_x.ids.empty() && test_x.dim != train_x.dim) {
    throw DataError("probe: train and test feature widths differ");
  }

  std::vector<std::string> classes;
  std::vector<int> train_y;
  std::vector<int> test_y;
  const bool override = options.label_override != nullptr;
  if (override) {
    const ClusterAssignment& a = *options.label_override;
    a.Validate();
    for (int c = 0; c < a.k; ++c) classes.push_back(std::to_string(c));
    train_y.reserve(train.size());
    for (const auto& id : train_x.ids) train_y.push_back(a.ClusterOf(id));
  } else {
    std::map<std::string, int> class_of;
    for (const auto& label : train.labels()) {
      class_of.emplace(label, static_cast<int>(classes.size()));
      classes.push_back(label);
    }
    train_y = ClassTargets(train, class_of);
    test_y = ClassTargets(test, class_of);
  }

  std::vector<size_t> rows;
  for (size_t i = 0; i < train_x.ids.size(); ++i) {
    if (!options.train_subset || options.train_subset->contains(train_x.ids[i])) {
      rows.push_back(i);
    }
  }
  if (options.train_subset && rows.size() != options.train_subset->size()) {
    throw DataError("probe: training subset names unknown ids");
  }
  if (rows.empty()) throw DataError("probe: empty training subset");
  std::vector<double> row_weight(train_x.ids.size(), 1.0);
  for (const auto& [id, w] : options.weights) {
    const Instance* rec = train.Find(id);
    if (rec == nullptr) throw DataError("probe: weight for unknown id '" + id + "'");
    if (!std::isfinite(w) || w < 0.0) {
      throw DataError("probe: weight for '" + id + "' must be finite and >= 0");
    }
    row_weight[static_cast<size_t>(rec - train.records().data())] = w;
  }

  Rng rng(config.seed);
  Mlp net(train_x.dim, config.hidden_dim, classes.size(), rng);
  const size_t d = train_x.dim;
  std::vector<double> bx, bw, grad;
  std::vector<int> by;
  std::vector<std::vector<double>> train_epochs, test_epochs;
  std::vector<double> epoch_loss;
  Evaluation train_eval, test_eval;

  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Shuffle(std::span<size_t>(rows), rng);
    double total = 0.0;
    size_t batch_index = 0;
    for (size_t start = 0; start < rows.size(); start += config.batch_size, ++batch_index) {
      const size_t end = std::min(rows.size(), start + config.batch_size);
      bx.resize((end - start) * d);
      by.resize(end - start);
      bw.resize(end - start);
      for (size_t i = start; i < end; ++i) {
        const size_t r = rows[i];
        std::copy_n(train_x.values.data() + r * d, d, bx.data() + (i - start) * d);
        by[i - start] = train_y[r];
        bw[i - start] = row_weight[r];
      }
      const double loss = BatchGradient(net, {bx, by, bw}, grad);
      if (!std::isfinite(loss)) {
        throw DataError("probe: non-finite loss at epoch " + std::to_string(epoch + 1) +
                        ", batch " + std::to_string(batch_index + 1));
      }
      total += loss * static_cast<double>(end - start);
      auto& params = net.parameters();
      bool finite = true;
      for (size_t p = 0; p < params.size(); ++p) {
        params[p] -= config.learning_rate * grad[p];
        finite = finite && std::isfinite(params[p]);
      }
      if (!finite) {
        throw DataError("probe: non-finite parameters after epoch " + std::to_string(epoch + 1) +
                        ", batch " + std::to_string(batch_index + 1));
      }
    }
    epoch_loss.push_back(total / static_cast<double>(rows.size()));
    const bool last = epoch + 1 == config.epochs;
    train_eval = Evaluate(net, train_x, &train_y, last);
    test_eval = Evaluate(net, test_x, override ? nullptr : &test_y, last);
    if (train_eval.overflow || test_eval.overflow) {
      throw DataError("probe: logits outside the float range at epoch " +
                      std::to_string(epoch + 1) + " (training diverged)");
    }
    train_epochs.push_back(std::move(train_eval.gold_prob));
    if (!override) test_epochs.push_back(std::move(test_eval.gold_prob));
  }

  const size_t h = config.hidden_dim;
  std::optional<DynamicsLog> test_dynamics;
  if (!override) test_dynamics = BuildDynamics(test_x.ids, test_y, classes, test_epochs);
  return ProbeOutput{
      classes,
      BuildDynamics(train_x.ids, train_y, classes, train_epochs),
      std::move(test_dynamics),
      EmbeddingSet(train_x.ids, h, std::move(train_eval.hidden)),
      EmbeddingSet(test_x.ids, h, std::move(test_eval.hidden)),
      EmbeddingSet(train_x.ids, classes.size(), std::move(train_eval.logits)),
      EmbeddingSet(test_x.ids, classes.size(), std::move(test_eval.logits)),
      Predictions(train_x.ids, train_eval.argmax, classes),
      Predictions(test_x.ids, test_eval.argmax, classes),
      std::move(epoch_loss)};
}

double TableAccuracy(const PredictionFile& preds, const InstanceTable& table) {
  if (table.size() == 0) throw DataError("accuracy: empty table");
  size_t correct = 0;
  for (const auto& rec : table.records()) {
    const std::string* p = preds.Find(rec.id);
    if (p == nullptr) throw DataError("accuracy: no prediction for '" + rec.id + "'");
    if (*p == rec.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(table.size());
}

}  // namespace biasforge::simlab
