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

#ifndef MOLFLOW_SAMPLER_H
#define MOLFLOW_SAMPLER_H

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "molflow/core.h"
#include "molflow/denoiser.h"
#include "molflow/flows.h"
#include "molflow/rng.h"

namespace molflow {

//! Strictly increasing sampling times from exactly 0 to exactly 1.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> points);

  //! 60 uniform steps on [0, 0.8] followed by 40 uniform steps on [0.8, 1].
  static TimeGrid twoPhase();
  static TimeGrid uniform(int steps);
  //! Parses "two-phase", "uniform:N" or a comma-separated list of times.
  static TimeGrid parse(const std::string& spec);

  const std::vector<double>& points() const { return points_; }
  int                        numSteps() const { return static_cast<int>(points_.size()) - 1; }
  double                     stepWidth(int step) const;
  std::string                describe() const;

 private:
  std::vector<double> points_;
  std::string         label_;
};

//! x_t + dt (x1_hat - x_t) / max(1 - t, eps).
Coords eulerPositionsStep(const Coords& xt, const Coords& x1Hat, TimePoint t, double dt, double eps = kTimeEps);

//! Per-atom categorical step distribution delta_{v_t} + R_t dt, clamped at zero and renormalized.
std::vector<double> typeStepDistribution(int vt, const TypeDistribution& p1GivenT, TimePoint t, double dt,
                                         double eps = kTimeEps);

//! One categorical Euler step for every atom. `probs` is N x k, rows are p_theta(v1 | v_t).
TypeVector eulerTypesStep(const TypeVector& vt, const Eigen::MatrixXd& probs, TimePoint t, double dt, Rng& rng,
                          double eps = kTimeEps);

//! Any model that maps (x_t, v_t, t) to a denoiser output.
using DenoiseFn = std::function<DenoiserOutput(const Coords& x, const TypeVector& v, double t)>;

struct SamplerOptions {
  double eps           = kTimeEps;
  double priorScale    = 1.0;
  bool   argmaxFinal   = false;  //!< terminal types by argmax instead of sampling
  bool   projectFinal  = true;   //!< last step takes x1_hat and samples from p_theta directly
};

struct GenerationResult {
  Molecule molecule;
  int      denoiserEvaluations = 0;
};

//! Joint continuous/discrete Euler integration along `grid` with an arbitrary denoiser.
GenerationResult generateWith(const DenoiseFn& model, int numAtoms, int numTypes, const TimeGrid& grid, Rng& rng,
                              const SamplerOptions& options = {});

//! Generation with the trained denoiser conditioned on `pocket`.
GenerationResult generate(const DenoiserParams& params, const PocketContext& pocket, int numAtoms,
                          const TimeGrid& grid, Rng& rng, const SamplerOptions& options = {});

//! Batch generation; molecule i uses rng.split(i) so results do not depend on the thread count.
std::vector<Molecule> generateBatch(const DenoiserParams& params, const std::vector<PocketContext>& pockets,
                                    const std::vector<int>& atomCounts, const TimeGrid& grid, const Rng& rng,
                                    const SamplerOptions& options = {}, int threads = 1);

}  // namespace molflow

#endif  // MOLFLOW_SAMPLER_H
