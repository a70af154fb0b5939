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

#ifndef BIASFORGE_TESTS_ORACLES_FINITE_DIFFERENCE_H_
#define BIASFORGE_TESTS_ORACLES_FINITE_DIFFERENCE_H_

// Central differences of the probe loss, one parameter at a time.

#include <algorithm>
#include <cmath>
#include <vector>

#include "biasforge/probe.h"

namespace biasforge::oracle {

// max_p |numeric - analytic| / max(|numeric|, |analytic|, 1e-6), step 1e-4.
inline double MaxRelativeGradientError(const simlab::Mlp& net, const simlab::Batch& batch) {
  std::vector<double> grad;
  simlab::BatchGradient(net, batch, grad);
  simlab::Mlp probe = net;
  double worst = 0.0;
  const double h = 1e-4;
  for (size_t p = 0; p < grad.size(); ++p) {
    const double saved = probe.parameters()[p];
    probe.parameters()[p] = saved + h;
    const double up = simlab::BatchLoss(probe, batch);
    probe.parameters()[p] = saved - h;
    const double down = simlab::BatchLoss(probe, batch);
    probe.parameters()[p] = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(numeric), std::abs(grad[p]), 1e-6});
    worst = std::max(worst, std::abs(numeric - grad[p]) / scale);
  }
  return worst;
}

}  // namespace biasforge::oracle

#endif  // BIASFORGE_TESTS_ORACLES_FINITE_DIFFERENCE_H_
