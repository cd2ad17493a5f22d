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

#include "molflow/train.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "molflow/flows.h"
#include "molflow/parallel.h"

namespace molflow {

namespace {

constexpr double kUniformWeight = 0.02;
constexpr double kBetaAlpha     = 1.9;

void requireFiniteLoss(double value, long step, const char* what) {
  if (!std::isfinite(value)) {
    throw std::runtime_error(std::string(what) + ": non-finite loss at step " + std::to_string(step));
  }
}

PocketContext jitterAnchors(const PocketContext& pocket, double sigma, Rng& rng) {
  PocketContext out = pocket;
  if (sigma > 0.0) {
    for (Eigen::Index i = 0; i < out.anchors.rows(); ++i) {
      for (int d = 0; d < 3; ++d) {
        out.anchors(i, d) += sigma * rng.normal();
      }
    }
  }
  return out;
}

double secondsSince(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void validateConfig(const TrainConfig& c) {
  if (!(c.lr >= 0.0)) {
    throw std::invalid_argument("train config: lr must be >= 0");
  }
  if (!(c.beta1 > 0.0 && c.beta1 < 1.0 && c.beta2 > 0.0 && c.beta2 < 1.0)) {
    throw std::invalid_argument("train config: Adam betas must lie in (0, 1)");
  }
  if (c.batchSize < 1) {
    throw std::invalid_argument("train config: batch size must be >= 1");
  }
  if (!(c.clipNorm > 0.0)) {
    throw std::invalid_argument("train config: clip norm must be > 0");
  }
  if (!(c.lambda >= 0.0)) {
    throw std::invalid_argument("train config: lambda must be >= 0");
  }
  if (c.decayInterval < 1 || !(c.decayFactor > 0.0 && c.decayFactor <= 1.0)) {
    throw std::invalid_argument("train config: invalid lr decay");
  }
  if (c.steps < 0) {
    throw std::invalid_argument("train config: steps must be >= 0");
  }
}

void validateConfig(const DpoConfig& c) {
  if (!(c.lr >= 0.0)) {
    throw std::invalid_argument("dpo config: lr must be >= 0");
  }
  if (!(c.beta > 0.0)) {
    throw std::invalid_argument("dpo config: beta must be > 0");
  }
  if (!(c.beta1 > 0.0 && c.beta1 < 1.0 && c.beta2 > 0.0 && c.beta2 < 1.0)) {
    throw std::invalid_argument("dpo config: Adam betas must lie in (0, 1)");
  }
  if (c.batchSize < 1) {
    throw std::invalid_argument("dpo config: batch size must be >= 1");
  }
  if (!(c.clipNorm > 0.0)) {
    throw std::invalid_argument("dpo config: clip norm must be > 0");
  }
  if (c.decayInterval < 1 || !(c.decayFactor > 0.0 && c.decayFactor <= 1.0)) {
    throw std::invalid_argument("dpo config: invalid lr decay");
  }
  if (c.steps < 0) {
    throw std::invalid_argument("dpo config: steps must be >= 0");
  }
}

double scheduledLearningRate(double lr, double factor, int interval, double floor, long step) {
  const long decays = step / std::max(1, interval);
  return std::max(floor, lr * std::pow(factor, static_cast<double>(decays)));
}

AdamOptimizer::AdamOptimizer(Eigen::Index size, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void AdamOptimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
  if (grad.size() != params.size() || m_.size() != params.size()) {
    throw std::invalid_argument("AdamOptimizer: size mismatch");
  }
  ++t_;
  m_                       = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_                       = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double mHat = m_[i] / correction1;
    const double vHat = v_[i] / correction2;
    params[i] -= lr * mHat / (std::sqrt(vHat) + eps_);
  }
}

double clipGradientNorm(Eigen::VectorXd& grad, double maxNorm) {
  const double norm = grad.norm();
  if (norm > maxNorm) {
    grad *= maxNorm / norm;
  }
  return norm;
}

TimePoint sampleTrainTime(Rng& rng) {
  if (rng.uniform() < kUniformWeight) {
    return TimePoint(rng.uniform());
  }
  // Beta(1.9, 1) has CDF t^1.9; invert it.
  return TimePoint(std::pow(rng.uniformOpenLow(), 1.0 / kBetaAlpha));
}

LossAndGrad moleculeLossAndGrad(const DenoiserParams& params, const TrainingExample& example, Rng& rng,
                                const TrainConfig& config) {
  const TimePoint        t      = sampleTrainTime(rng);
  const PocketContext    pocket = jitterAnchors(example.pocket, config.anchorNoise, rng);
  const CorruptionSample sample = corruptMolecule(example.molecule, t, rng, config.priorScale);

  ForwardCache         cache;
  const DenoiserOutput out = forward(params, makeDenoiserInput(sample.xt, sample.vt, t, pocket), cache);

  LossAndGrad result;
  result.loss = totalLoss(posLoss(out.x1Hat, sample.x1), typeLoss(out.logits, sample.v1),
                          chamfer(out.x1Hat, sample.x1), config.lambda);

  OutputCotangent cot;
  cot.x1Hat   = posLossGrad(out.x1Hat, sample.x1) + config.lambda * chamferGradFirst(out.x1Hat, sample.x1);
  cot.logits  = typeLossGrad(out.logits, sample.v1);
  result.grad = backward(params, cache, cot);
  return result;
}

TrainState TrainState::start(DenoiserParams params, double beta1, double beta2, double eps) {
  TrainState state;
  state.optimizer = AdamOptimizer(params.values.size(), beta1, beta2, eps);
  state.params    = std::move(params);
  return state;
}

LossBreakdown trainStep(TrainState& state, const std::vector<const TrainingExample*>& batch, const Rng& rng,
                        const TrainConfig& config) {
  if (batch.empty()) {
    throw std::invalid_argument("trainStep: empty batch");
  }
  std::vector<LossAndGrad> parts(batch.size());
  parallelFor(static_cast<int>(batch.size()), config.threads, [&](int i) {
    Rng molRng                    = rng.split(static_cast<std::uint64_t>(i));
    parts[static_cast<size_t>(i)] = moleculeLossAndGrad(state.params, *batch[static_cast<size_t>(i)], molRng, config);
  });

  // Fixed reduction order keeps the update independent of the thread count.
  const double    scale = 1.0 / static_cast<double>(batch.size());
  Eigen::VectorXd grad  = Eigen::VectorXd::Zero(state.params.values.size());
  LossBreakdown   mean{0.0, 0.0, 0.0, 0.0, config.lambda};
  for (const auto& p : parts) {
    grad += p.grad;
    mean.pos += p.loss.pos;
    mean.type += p.loss.type;
    mean.chamfer += p.loss.chamfer;
  }
  grad *= scale;
  mean = totalLoss(mean.pos * scale, mean.type * scale, mean.chamfer * scale, config.lambda);
  requireFiniteLoss(mean.total, state.step, "trainStep");
  if (!grad.allFinite()) {
    throw std::runtime_error("trainStep: non-finite gradient at step " + std::to_string(state.step));
  }

  clipGradientNorm(grad, config.clipNorm);
  const double lr =
      scheduledLearningRate(config.lr, config.decayFactor, config.decayInterval, config.lrFloor, state.step);
  state.optimizer.step(state.params.values, grad, lr);
  ++state.step;
  return mean;
}

DenoiserParams trainModel(const std::vector<TrainingExample>& data, DenoiserParams initial, const TrainConfig& config,
                          const StepCallback& onStep) {
  validateConfig(config);
  if (data.empty()) {
    throw std::invalid_argument("trainModel: empty dataset");
  }
  const auto start = std::chrono::steady_clock::now();
  const Rng  root(config.seed);
  TrainState state = TrainState::start(std::move(initial), config.beta1, config.beta2, config.adamEps);

  std::vector<const TrainingExample*> batch(static_cast<size_t>(config.batchSize));
  for (int s = 0; s < config.steps; ++s) {
    Rng stepRng = root.split(static_cast<std::uint64_t>(s));
    for (auto& slot : batch) {
      slot = &data[static_cast<size_t>(stepRng.uniformInt(static_cast<int>(data.size())))];
    }
    const double lr =
        scheduledLearningRate(config.lr, config.decayFactor, config.decayInterval, config.lrFloor, state.step);
    const LossBreakdown loss = trainStep(state, batch, stepRng.split(1), config);
    if (onStep) {
      StepReport report;
      report.step        = state.step;
      report.lr          = lr;
      report.wallSeconds = secondsSince(start);
      report.loss        = loss;
      onStep(report);
    }
  }
  return std::move(state.params);
}

double syntheticReward(const Molecule& molecule, const PocketContext& pocket, const RewardConfig& config) {
  requireValid(validateMolecule(molecule), "syntheticReward");
  if (pocket.anchors.rows() < 1) {
    throw std::invalid_argument("syntheticReward: pocket has no anchors");
  }
  const int n      = molecule.numAtoms();
  double    clash  = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double rMin = config.rMin;
      if (!config.typeRMin.empty()) {
        rMin = 0.5 * (config.typeRMin.at(static_cast<size_t>(molecule.types[static_cast<size_t>(i)])) +
                      config.typeRMin.at(static_cast<size_t>(molecule.types[static_cast<size_t>(j)])));
      }
      const double d = (molecule.positions.row(i) - molecule.positions.row(j)).norm();
      clash += std::pow(std::max(0.0, rMin - d), 2);
    }
  }
  double attraction = 0.0;
  for (int i = 0; i < n; ++i) {
    attraction += (pocket.anchors.rowwise() - molecule.positions.row(i)).rowwise().norm().minCoeff();
  }
  return -(clash + attraction);
}

std::pair<int, int> selectWinnerLoser(const std::vector<double>& rewards) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("selectWinnerLoser: need at least two rewards");
  }
  int winner = 0;
  int loser  = 0;
  for (int i = 1; i < static_cast<int>(rewards.size()); ++i) {
    if (rewards[static_cast<size_t>(i)] > rewards[static_cast<size_t>(winner)]) {
      winner = i;
    }
    if (rewards[static_cast<size_t>(i)] <= rewards[static_cast<size_t>(loser)]) {
      loser = i;
    }
  }
  return {winner, loser};
}

PreferenceBuildResult buildPreferencePairs(const DenoiserParams& params, const std::vector<PocketRequest>& pockets,
                                           int samplesPerPocket, const Rng& rng, const TimeGrid& grid,
                                           const RewardConfig& reward, const SamplerOptions& options, int threads) {
  if (samplesPerPocket < 2) {
    throw std::invalid_argument("buildPreferencePairs: need at least two samples per pocket");
  }
  std::vector<std::optional<PreferencePair>> slots(pockets.size());
  parallelFor(static_cast<int>(pockets.size()), threads, [&](int p) {
    const PocketRequest& request = pockets[static_cast<size_t>(p)];
    try {
      const Rng             pocketRng = rng.split(static_cast<std::uint64_t>(p));
      std::vector<Molecule> samples;
      std::vector<double>   rewards;
      for (int s = 0; s < samplesPerPocket; ++s) {
        Rng sampleRng = pocketRng.split(static_cast<std::uint64_t>(s));
        samples.push_back(generate(params, request.pocket, request.numAtoms, grid, sampleRng, options).molecule);
        rewards.push_back(syntheticReward(samples.back(), request.pocket, reward));
      }
      const auto [w, l]             = selectWinnerLoser(rewards);
      slots[static_cast<size_t>(p)] = PreferencePair{request.pocket, samples[static_cast<size_t>(w)],
                                                     samples[static_cast<size_t>(l)], rewards[static_cast<size_t>(w)],
                                                     rewards[static_cast<size_t>(l)]};
    } catch (const std::exception&) {
      slots[static_cast<size_t>(p)].reset();
    }
  });
  PreferenceBuildResult result;
  for (auto& slot : slots) {
    if (slot) {
      result.pairs.push_back(std::move(*slot));
    } else {
      ++result.skippedPockets;
    }
  }
  return result;
}

DpoGradResult pairDpoLossAndGrad(const DenoiserParams& params, const DenoiserParams& reference,
                                 const PreferencePair& pair, Rng& rng, const DpoConfig& config) {
  const TimePoint        t       = sampleTrainTime(rng);
  const CorruptionSample sampleW = corruptMolecule(pair.winner, t, rng, config.priorScale);
  const CorruptionSample sampleL = corruptMolecule(pair.loser, t, rng, config.priorScale);
  const DenoiserInput    inputW  = makeDenoiserInput(sampleW.xt, sampleW.vt, t, pair.pocket);
  const DenoiserInput    inputL  = makeDenoiserInput(sampleL.xt, sampleL.vt, t, pair.pocket);

  ForwardCache         cacheW;
  ForwardCache         cacheL;
  const DenoiserOutput thetaW = forward(params, inputW, cacheW);
  const DenoiserOutput thetaL = forward(params, inputL, cacheL);
  const DenoiserOutput refW   = forward(reference, inputW);
  const DenoiserOutput refL   = forward(reference, inputL);

  const DpoArm winner{sampleW.x1, sampleW.v1, thetaW.x1Hat, refW.x1Hat, thetaW.logits, refW.logits};
  const DpoArm loser{sampleL.x1, sampleL.v1, thetaL.x1Hat, refL.x1Hat, thetaL.logits, refL.logits};
  const DpoGradients g = dpoTotalWithGrad(winner, loser, t, config.beta);

  DpoGradResult result;
  result.loss = g.value;
  result.grad = backward(params, cacheW, OutputCotangent{g.winnerX1Hat, g.winnerLogits}) +
                backward(params, cacheL, OutputCotangent{g.loserX1Hat, g.loserLogits});
  return result;
}

DpoBreakdown dpoStep(TrainState& state, const DenoiserParams& reference, const std::vector<const PreferencePair*>& batch,
                     const Rng& rng, const DpoConfig& config) {
  if (batch.empty()) {
    throw std::invalid_argument("dpoStep: empty batch");
  }
  if (reference.values.size() != state.params.values.size() || !(reference.arch == state.params.arch)) {
    throw std::invalid_argument("dpoStep: reference model does not match the policy architecture");
  }
  std::vector<DpoGradResult> parts(batch.size());
  parallelFor(static_cast<int>(batch.size()), config.threads, [&](int i) {
    Rng pairRng = rng.split(static_cast<std::uint64_t>(i));
    parts[static_cast<size_t>(i)] =
        pairDpoLossAndGrad(state.params, reference, *batch[static_cast<size_t>(i)], pairRng, config);
  });

  const double    scale = 1.0 / static_cast<double>(batch.size());
  Eigen::VectorXd grad  = Eigen::VectorXd::Zero(state.params.values.size());
  double          pos = 0.0, cloud = 0.0, type = 0.0;
  for (const auto& p : parts) {
    grad += p.grad;
    pos += p.loss.pos;
    cloud += p.loss.pointCloud;
    type += p.loss.type;
  }
  grad *= scale;
  const DpoBreakdown mean = dpoTotal(pos * scale, cloud * scale, type * scale, config.beta);
  requireFiniteLoss(mean.total, state.step, "dpoStep");
  if (!grad.allFinite()) {
    throw std::runtime_error("dpoStep: non-finite gradient at step " + std::to_string(state.step));
  }

  clipGradientNorm(grad, config.clipNorm);
  const double lr =
      scheduledLearningRate(config.lr, config.decayFactor, config.decayInterval, config.lrFloor, state.step);
  state.optimizer.step(state.params.values, grad, lr);
  ++state.step;
  return mean;
}

DenoiserParams trainDpo(const std::vector<PreferencePair>& pairs, const DenoiserParams& base, const DpoConfig& config,
                        const StepCallback& onStep) {
  validateConfig(config);
  if (pairs.empty()) {
    throw std::invalid_argument("trainDpo: no preference pairs");
  }
  const auto           start     = std::chrono::steady_clock::now();
  const DenoiserParams reference = base;
  const Rng            root(config.seed);
  TrainState           state = TrainState::start(base, config.beta1, config.beta2, config.adamEps);

  std::vector<const PreferencePair*> batch(static_cast<size_t>(config.batchSize));
  for (int s = 0; s < config.steps; ++s) {
    Rng stepRng = root.split(static_cast<std::uint64_t>(s));
    for (auto& slot : batch) {
      slot = &pairs[static_cast<size_t>(stepRng.uniformInt(static_cast<int>(pairs.size())))];
    }
    const double lr =
        scheduledLearningRate(config.lr, config.decayFactor, config.decayInterval, config.lrFloor, state.step);
    const DpoBreakdown loss = dpoStep(state, reference, batch, stepRng.split(1), config);
    if (onStep) {
      StepReport report;
      report.step        = state.step;
      report.lr          = lr;
      report.wallSeconds = secondsSince(start);
      report.dpo         = loss;
      onStep(report);
    }
  }
  return std::move(state.params);
}

}  // namespace molflow
