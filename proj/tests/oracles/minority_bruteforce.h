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

#ifndef BIASFORGE_TESTS_ORACLES_MINORITY_BRUTEFORCE_H_
#define BIASFORGE_TESTS_ORACLES_MINORITY_BRUTEFORCE_H_

// Direct enumeration of the minority-example definitions: for every
// instance, rescan its whole cluster to count labels.

#include <string>
#include <vector>

#include "biasforge/dataio.h"

namespace biasforge::oracle {

struct Labeled {
  std::string id;
  std::string label;
  int cluster;
};

inline std::vector<std::pair<std::string, size_t>> CountsIn(
    const std::vector<Labeled>& train, int cluster) {
  std::vector<std::pair<std::string, size_t>> counts;
  for (const auto& a : train) {
    if (a.cluster != cluster) continue;
    bool found = false;
    for (auto& [label, c] : counts) {
      if (label == a.label) {
        ++c;
        found = true;
      }
    }
    if (!found) counts.emplace_back(a.label, 1);
  }
  return counts;
}

// Majority: no other label has a larger count; among those, smallest label.
inline std::string MajorityOf(const std::vector<Labeled>& train, int cluster) {
  const auto counts = CountsIn(train, cluster);
  std::string best;
  for (const auto& [label, c] : counts) {
    bool maximal = true;
    for (const auto& [other, oc] : counts) maximal = maximal && oc <= c;
    if (maximal && (best.empty() || label < best)) best = label;
  }
  return best;
}

// Least label: among present non-majority labels with minimal count, the
// smallest; empty when fewer than two labels are present.
inline std::string LeastOf(const std::vector<Labeled>& train, int cluster) {
  const auto counts = CountsIn(train, cluster);
  if (counts.size() < 2) return "";
  const std::string majority = MajorityOf(train, cluster);
  std::string best;
  for (const auto& [label, c] : counts) {
    if (label == majority) continue;
    bool minimal = true;
    for (const auto& [other, oc] : counts) {
      minimal = minimal && (other == majority || oc >= c);
    }
    if (minimal && (best.empty() || label < best)) best = label;
  }
  return best;
}

inline IdSet TrainHard(const std::vector<Labeled>& train, bool least_label) {
  IdSet out;
  for (const auto& a : train) {
    const bool hard = least_label ? a.label == LeastOf(train, a.cluster)
                                  : a.label != MajorityOf(train, a.cluster);
    if (hard) out.insert(a.id);
  }
  return out;
}

inline IdSet TestHard(const std::vector<Labeled>& train,
                      const std::vector<Labeled>& test, bool least_label) {
  IdSet out;
  for (const auto& t : test) {
    const bool hard = least_label ? t.label == LeastOf(train, t.cluster)
                                  : t.label != MajorityOf(train, t.cluster);
    if (hard) out.insert(t.id);
  }
  return out;
}

}  // namespace biasforge::oracle

#endif  // BIASFORGE_TESTS_ORACLES_MINORITY_BRUTEFORCE_H_
