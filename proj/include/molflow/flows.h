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

#ifndef MOLFLOW_FLOWS_H
#define MOLFLOW_FLOWS_H

#include <algorithm>
#include <vector>

#include "molflow/core.h"
#include "molflow/rng.h"

namespace molflow {

//! All 1/(1 - t) divisors use max(1 - t, kTimeEps).
inline constexpr double kTimeEps = 1e-3;

//! Probability vector over [k]. Construction checks non-negativity and unit sum (1e-9).
class TypeDistribution {
 public:
  explicit TypeDistribution(std::vector<double> probs);

  static TypeDistribution uniform(int k);
  static TypeDistribution delta(int state, int k);

  int                        numTypes() const { return static_cast<int>(probs_.size()); }
  double                     operator[](int j) const { return probs_[static_cast<size_t>(j)]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

//! One row of a CTMC rate matrix: off-diagonals non-negative, diagonal is minus their sum.
struct RateRow {
  std::vector<double> rates;
  int                 sourceState = 0;
};

inline double clampedRemaining(double t, double eps) {
  return std::max(1.0 - t, eps);
}

// Continuous modality --------------------------------------------------------

//! (1 - t) x0 + t x1.
Coords interpolatePositions(const Coords& x0, const Coords& x1, TimePoint t);
//! x1 - x0; constant along the linear path.
Coords conditionalVelocity(const Coords& x0, const Coords& x1);
//! Isotropic Gaussian draw per atom, scaled, then centered.
Coords samplePositionPrior(int numAtoms, Rng& rng, double scale = 1.0);

// Discrete modality ----------------------------------------------------------

//! Uniform corruption: (1 - t)/k + t [j == v1].
TypeDistribution corruptionDist(int v1, TimePoint t, int k);
//! Independent per-atom draws from corruptionDist.
TypeVector corruptTypes(const TypeVector& v1, TimePoint t, int k, Rng& rng);
//! (1 - t)/k + t p_data[j].
TypeDistribution marginalTypeDist(const TypeDistribution& pData, TimePoint t);
//! q(v1 | v_t) by Bayes' rule over the uniform corruption likelihood.
TypeDistribution posteriorV1GivenVt(const TypeDistribution& pData, int vt, TimePoint t);
//! Model-based rate row: p(j) / max(1 - t, eps) for j != v_t.
RateRow unconditionalRateFromModel(const TypeDistribution& p1GivenT, int vt, TimePoint t, double eps = kTimeEps);
//! Conditional rate for the uniform interpolant: [j == v1][v_t != v1] / max(1 - t, eps).
RateRow conditionalRate(int vt, int v1, TimePoint t, int k, double eps = kTimeEps);

//! Draws from a categorical distribution given as (possibly unnormalized) non-negative weights.
int sampleCategorical(const std::vector<double>& weights, Rng& rng);

//! Joint corruption of a clean molecule at time t with a fresh prior draw.
CorruptionSample corruptMolecule(const Molecule& clean, TimePoint t, Rng& rng, double priorScale = 1.0);

}  // namespace molflow

#endif  // MOLFLOW_FLOWS_H
