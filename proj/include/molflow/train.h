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

#ifndef MOLFLOW_TRAIN_H
#define MOLFLOW_TRAIN_H

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

#include "molflow/core.h"
#include "molflow/denoiser.h"
#include "molflow/losses.h"
#include "molflow/rng.h"
#include "molflow/sampler.h"

namespace molflow {

struct TrainConfig {
  double        lr            = 5e-5;
  double        beta1         = 0.95;
  double        beta2         = 0.999;
  double        adamEps       = 1e-8;
  int           batchSize     = 16;
  double        clipNorm      = 8.0;
  double        decayFactor   = 0.6;
  int           decayInterval = 1000;
  double        lrFloor       = 1e-8;
  double        lambda        = 0.5;
  double        anchorNoise   = 0.1;  //!< std-dev of Gaussian augmentation on pocket anchors
  double        priorScale    = 1.0;
  int           steps         = 20000;
  std::uint64_t seed          = 0;
  int           threads       = 1;
};

struct DpoConfig {
  double        lr            = 5e-8;
  double        beta          = 5.0;
  double        beta1         = 0.95;
  double        beta2         = 0.999;
  double        adamEps       = 1e-8;
  int           batchSize     = 16;
  double        clipNorm      = 8.0;
  double        decayFactor   = 0.6;
  int           decayInterval = 1000;
  double        lrFloor       = 1e-11;
  double        priorScale    = 1.0;
  int           steps         = 2000;
  std::uint64_t seed          = 0;
  int           threads       = 1;
};

//! Throws std::invalid_argument on an invalid field.
void validateConfig(const TrainConfig& config);
void validateConfig(const DpoConfig& config);

//! Exponential step decay: max(floor, lr * factor^(step / interval)).
double scheduledLearningRate(double lr, double factor, int interval, double floor, long step);

//! Adam with bias correction.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(Eigen::Index size, double beta1, double beta2, double eps);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);
  long iterations() const { return t_; }

 private:
  double          beta1_ = 0.9;
  double          beta2_ = 0.999;
  double          eps_   = 1e-8;
  long            t_     = 0;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
};

//! Scales grad in place to at most maxNorm; returns the norm before clipping.
double clipGradientNorm(Eigen::VectorXd& grad, double maxNorm);

//! Training-time draw: 0.02 U(0,1) + 0.98 Beta(1.9, 1).
TimePoint sampleTrainTime(Rng& rng);

struct TrainingExample {
  Molecule      molecule;
  PocketContext pocket;
};

struct LossAndGrad {
  LossBreakdown   loss;
  Eigen::VectorXd grad;
};

//! One corrupted draw of the combined objective for a single molecule, with its parameter gradient.
LossAndGrad moleculeLossAndGrad(const DenoiserParams& params, const TrainingExample& example, Rng& rng,
                                const TrainConfig& config);

struct TrainState {
  DenoiserParams params;
  AdamOptimizer  optimizer;
  long           step = 0;

  static TrainState start(DenoiserParams params, double beta1, double beta2, double eps);
};

//! One Adam update on the batch-mean objective. Batch element i uses rng.split(i).
LossBreakdown trainStep(TrainState& state, const std::vector<const TrainingExample*>& batch, const Rng& rng,
                        const TrainConfig& config);

struct StepReport {
  long   step       = 0;
  double lr         = 0.0;
  double wallSeconds = 0.0;
  LossBreakdown loss;
  DpoBreakdown  dpo;
};
using StepCallback = std::function<void(const StepReport&)>;

//! Full base-model training run from `initial`. Deterministic given config.seed.
DenoiserParams trainModel(const std::vector<TrainingExample>& data, DenoiserParams initial, const TrainConfig& config,
                          const StepCallback& onStep = {});

// Preference data -------------------------------------------------------------

struct RewardConfig {
  double              rMin = 1.2;
  std::vector<double> typeRMin;  //!< optional per-type radii; pair threshold is their mean
};

//! -(clash + attraction); clash sums max(0, r_min - d_ij)^2 over atom pairs,
//! attraction sums each atom's distance to its nearest anchor.
double syntheticReward(const Molecule& molecule, const PocketContext& pocket, const RewardConfig& config = {});

struct PocketRequest {
  PocketContext pocket;
  int           numAtoms = 0;
};

struct PreferenceBuildResult {
  std::vector<PreferencePair> pairs;
  int                         skippedPockets = 0;
};

//! Index of the best (winner) and worst (loser) reward; ties go to the lower index for the winner
//! and to the higher index for the loser, so the two differ whenever there are >= 2 rewards.
std::pair<int, int> selectWinnerLoser(const std::vector<double>& rewards);

PreferenceBuildResult buildPreferencePairs(const DenoiserParams& params, const std::vector<PocketRequest>& pockets,
                                           int samplesPerPocket, const Rng& rng, const TimeGrid& grid,
                                           const RewardConfig& reward = {}, const SamplerOptions& options = {},
                                           int threads = 1);

// Preference fine-tuning ------------------------------------------------------

struct DpoGradResult {
  DpoBreakdown    loss;
  Eigen::VectorXd grad;
};

//! DPO objective for one pair at a shared t with independently corrupted arms.
DpoGradResult pairDpoLossAndGrad(const DenoiserParams& params, const DenoiserParams& reference,
                                 const PreferencePair& pair, Rng& rng, const DpoConfig& config);

//! One Adam update of `state` on the batch-mean DPO objective; `reference` is never modified.
DpoBreakdown dpoStep(TrainState& state, const DenoiserParams& reference, const std::vector<const PreferencePair*>& batch,
                     const Rng& rng, const DpoConfig& config);

//! DPO fine-tuning from `base`; the frozen reference is a copy of `base`.
DenoiserParams trainDpo(const std::vector<PreferencePair>& pairs, const DenoiserParams& base, const DpoConfig& config,
                        const StepCallback& onStep = {});

}  // namespace molflow

#endif  // MOLFLOW_TRAIN_H
