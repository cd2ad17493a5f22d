// SPDX-FileCopyrightText: Copyright (c) 2026 molflow contributors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "molflow/flows.h"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace molflow {

namespace {

void checkSameShape(const Coords& a, const Coords& b, const char* where) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument(std::string(where) + ": shape mismatch (" + std::to_string(a.rows()) + " vs " +
                                std::to_string(b.rows()) + " rows)");
  }
}

void checkState(int state, int k, const char* where) {
  if (k < 2) {
    throw std::invalid_argument(std::string(where) + ": k must be >= 2");
  }
  if (state < 0 || state >= k) {
    throw std::invalid_argument(std::string(where) + ": state " + std::to_string(state) + " outside [0, " +
                                std::to_string(k) + ")");
  }
}

void fillDiagonal(RateRow& row) {
  double offDiagonal = 0.0;
  for (size_t j = 0; j < row.rates.size(); ++j) {
    if (static_cast<int>(j) != row.sourceState) {
      offDiagonal += row.rates[j];
    }
  }
  row.rates[static_cast<size_t>(row.sourceState)] = -offDiagonal;
}

}  // namespace

TypeDistribution::TypeDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) {
    throw std::invalid_argument("TypeDistribution: need at least two states");
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("TypeDistribution: negative or non-finite probability");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("TypeDistribution: probabilities sum to " + std::to_string(total));
  }
}

TypeDistribution TypeDistribution::uniform(int k) {
  return TypeDistribution(std::vector<double>(static_cast<size_t>(k), 1.0 / k));
}

TypeDistribution TypeDistribution::delta(int state, int k) {
  checkState(state, k, "TypeDistribution::delta");
  std::vector<double> probs(static_cast<size_t>(k), 0.0);
  probs[static_cast<size_t>(state)] = 1.0;
  return TypeDistribution(std::move(probs));
}

Coords interpolatePositions(const Coords& x0, const Coords& x1, TimePoint t) {
  checkSameShape(x0, x1, "interpolatePositions");
  const double s = t.value();
  if (s == 1.0) {
    return x1;
  }
  if (s == 0.0) {
    return x0;
  }
  return (1.0 - s) * x0 + s * x1;
}

Coords conditionalVelocity(const Coords& x0, const Coords& x1) {
  checkSameShape(x0, x1, "conditionalVelocity");
  return x1 - x0;
}

Coords samplePositionPrior(int numAtoms, Rng& rng, double scale) {
  if (numAtoms < 1) {
    throw std::invalid_argument("samplePositionPrior: need at least one atom");
  }
  Coords x(numAtoms, 3);
  for (int i = 0; i < numAtoms; ++i) {
    for (int d = 0; d < 3; ++d) {
      x(i, d) = scale * rng.normal();
    }
  }
  return centerPositions(x);
}

TypeDistribution corruptionDist(int v1, TimePoint t, int k) {
  checkState(v1, k, "corruptionDist");
  const double        s = t.value();
  std::vector<double> probs(static_cast<size_t>(k), (1.0 - s) / k);
  probs[static_cast<size_t>(v1)] += s;
  return TypeDistribution(std::move(probs));
}

TypeVector corruptTypes(const TypeVector& v1, TimePoint t, int k, Rng& rng) {
  TypeVector out(v1.size());
  const double s = t.value();
  for (size_t i = 0; i < v1.size(); ++i) {
    checkState(v1[i], k, "corruptTypes");
    // Keep the clean state with probability t, otherwise resample uniformly;
    // the mixture equals corruptionDist(v1, t, k).
    const double u = rng.uniform();
    out[i]         = (u < s) ? v1[i] : rng.uniformInt(k);
  }
  return out;
}

TypeDistribution marginalTypeDist(const TypeDistribution& pData, TimePoint t) {
  const int           k = pData.numTypes();
  const double        s = t.value();
  std::vector<double> probs(static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) {
    probs[static_cast<size_t>(j)] = (1.0 - s) / k + s * pData[j];
  }
  return TypeDistribution(std::move(probs));
}

TypeDistribution posteriorV1GivenVt(const TypeDistribution& pData, int vt, TimePoint t) {
  const int k = pData.numTypes();
  checkState(vt, k, "posteriorV1GivenVt");
  const double s        = t.value();
  const double marginal = (1.0 - s) / k + s * pData[vt];
  if (!(marginal > 0.0)) {
    throw std::invalid_argument("posteriorV1GivenVt: unreachable state");
  }
  std::vector<double> probs(static_cast<size_t>(k));
  double              total = 0.0;
  for (int v1 = 0; v1 < k; ++v1) {
    const double likelihood        = (1.0 - s) / k + (v1 == vt ? s : 0.0);
    probs[static_cast<size_t>(v1)] = likelihood * pData[v1] / marginal;
    total += probs[static_cast<size_t>(v1)];
  }
  // Re-normalize away rounding so the result passes the 1e-9 sum check exactly.
  for (double& p : probs) {
    p /= total;
  }
  return TypeDistribution(std::move(probs));
}

RateRow unconditionalRateFromModel(const TypeDistribution& p1GivenT, int vt, TimePoint t, double eps) {
  const int k = p1GivenT.numTypes();
  checkState(vt, k, "unconditionalRateFromModel");
  const double divisor = clampedRemaining(t.value(), eps);
  RateRow      row{std::vector<double>(static_cast<size_t>(k), 0.0), vt};
  for (int j = 0; j < k; ++j) {
    if (j != vt) {
      row.rates[static_cast<size_t>(j)] = p1GivenT[j] / divisor;
    }
  }
  fillDiagonal(row);
  return row;
}

RateRow conditionalRate(int vt, int v1, TimePoint t, int k, double eps) {
  checkState(vt, k, "conditionalRate");
  checkState(v1, k, "conditionalRate");
  RateRow row{std::vector<double>(static_cast<size_t>(k), 0.0), vt};
  if (vt != v1) {
    row.rates[static_cast<size_t>(v1)] = 1.0 / clampedRemaining(t.value(), eps);
  }
  fillDiagonal(row);
  return row;
}

int sampleCategorical(const std::vector<double>& weights, Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::invalid_argument("sampleCategorical: weights must have positive finite mass");
  }
  const double target = rng.uniform() * total;
  double       acc    = 0.0;
  int          last   = 0;
  for (size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] <= 0.0) {
      continue;
    }
    acc += weights[j];
    last = static_cast<int>(j);
    if (target < acc) {
      return last;
    }
  }
  return last;
}

CorruptionSample corruptMolecule(const Molecule& clean, TimePoint t, Rng& rng, double priorScale) {
  CorruptionSample sample;
  sample.t  = t.value();
  sample.x1 = clean.positions;
  sample.x0 = samplePositionPrior(clean.numAtoms(), rng, priorScale);
  sample.xt = interpolatePositions(sample.x0, sample.x1, t);
  sample.v1 = clean.types;
  sample.vt = corruptTypes(clean.types, t, clean.numTypes, rng);
  return sample;
}

}  // namespace molflow
