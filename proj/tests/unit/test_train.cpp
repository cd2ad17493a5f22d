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

#include <gtest/gtest.h>

#include <cmath>

#include "molflow/train.h"
#include "test_support.h"

using namespace molflow;

namespace {

std::vector<TrainingExample> toyExamples(int count, std::uint64_t seed) {
  ToyDatasetConfig config;
  config.count      = count;
  config.numPockets = 6;
  Rng rng(seed);
  return generateToyDataset(config, rng).records;
}

TrainConfig quickConfig() {
  TrainConfig config;
  config.lr        = 3e-3;
  config.batchSize = 8;
  config.steps     = 10;
  config.seed      = 3;
  return config;
}

double fixedBatchLoss(const DenoiserParams& params, const std::vector<TrainingExample>& data, const TrainConfig& config) {
  double total = 0.0;
  for (size_t i = 0; i < data.size(); ++i) {
    // Several fixed corruption draws per molecule make the evaluation low-variance and deterministic.
    for (std::uint64_t r = 0; r < 4; ++r) {
      Rng rng = Rng(1000).split(i, r);
      total += moleculeLossAndGrad(params, data[i], rng, config).loss.total;
    }
  }
  return total / (4.0 * data.size());
}

}  // namespace

TEST(TrainTime, RangeAndMoments) {
  Rng       rng(1);
  const int n    = 200000;
  double    sum  = 0.0;
  int       below = 0;
  for (int i = 0; i < n; ++i) {
    const double t = sampleTrainTime(rng).value();
    ASSERT_GE(t, 0.0);
    ASSERT_LE(t, 1.0);
    sum += t;
    below += t <= 0.5;
  }
  const double mean = 0.02 * 0.5 + 0.98 * (1.9 / 2.9);
  const double cdf  = 0.02 * 0.5 + 0.98 * std::pow(0.5, 1.9);
  EXPECT_NEAR(sum / n, mean, 0.004);
  EXPECT_NEAR(static_cast<double>(below) / n, cdf, 0.006);
}

TEST(LearningRate, StepDecayWithFloor) {
  EXPECT_DOUBLE_EQ(scheduledLearningRate(1.0, 0.6, 1000, 1e-3, 0), 1.0);
  EXPECT_DOUBLE_EQ(scheduledLearningRate(1.0, 0.6, 1000, 1e-3, 999), 1.0);
  EXPECT_DOUBLE_EQ(scheduledLearningRate(1.0, 0.6, 1000, 1e-3, 1000), 0.6);
  EXPECT_NEAR(scheduledLearningRate(1.0, 0.6, 1000, 1e-3, 2500), 0.36, 1e-15);
  EXPECT_DOUBLE_EQ(scheduledLearningRate(1.0, 0.6, 1000, 1e-3, 100000), 1e-3);
}

TEST(Adam, MatchesHandRolledReference) {
  Rng             rng(2);
  const int       n = 7;
  Eigen::VectorXd params(n), ref(n), m = Eigen::VectorXd::Zero(n), v = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    params[i] = ref[i] = rng.normal();
  }
  const double  b1 = 0.95, b2 = 0.999, eps = 1e-8, lr = 1e-2;
  AdamOptimizer adam(n, b1, b2, eps);
  for (int step = 1; step <= 25; ++step) {
    Eigen::VectorXd grad(n);
    for (int i = 0; i < n; ++i) {
      grad[i] = rng.normal() + 0.1 * ref[i];
    }
    adam.step(params, grad, lr);
    for (int i = 0; i < n; ++i) {
      m[i]             = b1 * m[i] + (1 - b1) * grad[i];
      v[i]             = b2 * v[i] + (1 - b2) * grad[i] * grad[i];
      const double mh  = m[i] / (1 - std::pow(b1, step));
      const double vh  = v[i] / (1 - std::pow(b2, step));
      ref[i]          -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
  EXPECT_LE((params - ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(adam.iterations(), 25);
}

TEST(Clip, ScalesToMaxNorm) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(4);
  g << 60, 80, 0, 0;
  EXPECT_DOUBLE_EQ(clipGradientNorm(g, 8.0), 100.0);
  EXPECT_NEAR(g.norm(), 8.0, 1e-12);
  EXPECT_NEAR(g[0] / g[1], 0.75, 1e-15);
  Eigen::VectorXd small = Eigen::VectorXd::Constant(3, 0.1);
  const auto      copy  = small;
  clipGradientNorm(small, 8.0);
  EXPECT_EQ(small, copy);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.lr = -1;
  EXPECT_THROW(validateConfig(c), std::invalid_argument);
  c           = TrainConfig{};
  c.batchSize = 0;
  EXPECT_THROW(validateConfig(c), std::invalid_argument);
  DpoConfig d;
  d.beta = 0;
  EXPECT_THROW(validateConfig(d), std::invalid_argument);
}

TEST(MoleculeLoss, GradientMatchesFiniteDifferences) {
  const auto       data = toyExamples(3, 4);
  const ArchConfig arch = support::smallArch();
  Rng              init(5);
  const auto       params = initParams(arch, init);
  TrainConfig      config;
  const auto       eval = [&](const DenoiserParams& p) {
    Rng rng(77);
    return moleculeLossAndGrad(p, data[1], rng, config);
  };
  const auto grad = eval(params).grad;
  for (Eigen::Index idx : support::probeIndices(params.values.size(), 25, init)) {
    const double numeric =
        support::centralDifference([&](const DenoiserParams& p) { return eval(p).loss.total; }, params, idx);
    EXPECT_LE(support::relativeError(grad[idx], numeric), 1e-4) << "parameter " << idx;
  }
}

TEST(TrainStep, ZeroLearningRateKeepsParams) {
  const auto       data = toyExamples(10, 6);
  const ArchConfig arch = support::smallArch();
  Rng              init(7);
  TrainState       state = TrainState::start(initParams(arch, init), 0.95, 0.999, 1e-8);
  const auto       before = state.params.values;
  TrainConfig      config = quickConfig();
  config.lr               = 0.0;
  config.lrFloor          = 0.0;
  trainStep(state, {&data[0], &data[1], &data[2]}, Rng(1), config);
  EXPECT_EQ(state.params.values, before);
  EXPECT_EQ(state.step, 1);
}

TEST(TrainStep, IndependentOfThreadCount) {
  const auto       data = toyExamples(10, 8);
  const ArchConfig arch = support::smallArch();
  Rng              init(9);
  const auto       params = initParams(arch, init);
  std::vector<const TrainingExample*> batch{&data[0], &data[3], &data[5], &data[7], &data[9]};
  TrainConfig config = quickConfig();
  TrainState  one    = TrainState::start(params, 0.95, 0.999, 1e-8);
  TrainState  four   = TrainState::start(params, 0.95, 0.999, 1e-8);
  config.threads     = 1;
  const auto l1      = trainStep(one, batch, Rng(2), config);
  config.threads     = 4;
  const auto l4      = trainStep(four, batch, Rng(2), config);
  EXPECT_EQ(one.params.values, four.params.values);
  EXPECT_EQ(l1.total, l4.total);
}

TEST(TrainModel, LossDecreasesOnSmallSet) {
  const auto       data = toyExamples(50, 10);
  const ArchConfig arch = support::smallArch(16, 2);
  Rng              init(11);
  const auto       params = initParams(arch, init);
  TrainConfig      config = quickConfig();
  config.steps            = 200;
  const double before     = fixedBatchLoss(params, data, config);
  const auto   trained    = trainModel(data, params, config);
  const double after      = fixedBatchLoss(trained, data, config);
  EXPECT_LT(after, 0.8 * before) << before << " -> " << after;
}

TEST(TrainModel, DeterministicAndReportsSteps) {
  const auto       data = toyExamples(20, 12);
  const ArchConfig arch = support::smallArch();
  Rng              init(13);
  const auto       params = initParams(arch, init);
  long             last   = 0;
  const auto       a      = trainModel(data, params, quickConfig(), [&](const StepReport& r) { last = r.step; });
  const auto       b      = trainModel(data, params, quickConfig());
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(last, quickConfig().steps);
}

TEST(Reward, CoincidentPairClash) {
  Molecule m;
  m.numTypes  = 6;
  m.positions = Coords::Zero(2, 3);
  m.types     = {0, 1};
  PocketContext pocket;
  pocket.anchors = Coords::Zero(1, 3);
  RewardConfig config;
  config.rMin = 1.0;
  EXPECT_DOUBLE_EQ(syntheticReward(m, pocket, config), -1.0);
}

TEST(Reward, MaximalOnAnchorsWithoutClash) {
  Molecule m;
  m.numTypes  = 6;
  m.positions = Coords(3, 3);
  m.positions << 0, 0, 0, 2, 0, 0, 0, 2, 0;
  m.types = {0, 1, 2};
  PocketContext pocket;
  pocket.anchors = m.positions;
  EXPECT_EQ(syntheticReward(m, pocket), 0.0);
  Molecule moved       = m;
  moved.positions(2, 1) = 2.5;
  EXPECT_DOUBLE_EQ(syntheticReward(moved, pocket), -0.5);
  moved.positions(2, 1) = 3.0;
  EXPECT_DOUBLE_EQ(syntheticReward(moved, pocket), -1.0);
}

TEST(Reward, PerTypeRadii) {
  Molecule m;
  m.numTypes  = 2;
  m.positions = Coords(2, 3);
  m.positions << 0, 0, 0, 1, 0, 0;
  m.types = {0, 1};
  PocketContext pocket;
  pocket.anchors = m.positions;
  RewardConfig config;
  config.typeRMin = {1.0, 2.0};  // pair threshold 1.5
  EXPECT_NEAR(syntheticReward(m, pocket, config), -0.25, 1e-15);
}

TEST(SelectWinnerLoser, Examples) {
  EXPECT_EQ(selectWinnerLoser({3, 1, 2}), std::make_pair(0, 1));
  EXPECT_EQ(selectWinnerLoser({1, 2}), std::make_pair(1, 0));
  EXPECT_EQ(selectWinnerLoser({5, 5, 5}), std::make_pair(0, 2));
}

TEST(PreferencePairs, WinnerBeatsLoserAndSkipsFailures) {
  const ArchConfig arch = support::smallArch();
  Rng              init(14);
  const auto       params = initParams(arch, init);
  std::vector<PocketRequest> requests;
  for (int p = 0; p < 4; ++p) {
    requests.push_back(PocketRequest{support::randomPocket(arch.featureDim, init), 4 + p});
  }
  requests[2].numAtoms = 0;  // cannot be generated
  const auto a = buildPreferencePairs(params, requests, 3, Rng(15), TimeGrid::uniform(10));
  const auto b = buildPreferencePairs(params, requests, 3, Rng(15), TimeGrid::uniform(10), {}, {}, 3);
  EXPECT_EQ(a.pairs.size(), 3u);
  EXPECT_EQ(a.skippedPockets, 1);
  for (size_t i = 0; i < a.pairs.size(); ++i) {
    EXPECT_GE(a.pairs[i].rewardWinner, a.pairs[i].rewardLoser);
    EXPECT_TRUE(validatePreferencePair(a.pairs[i]).ok());
    EXPECT_DOUBLE_EQ(a.pairs[i].rewardWinner, syntheticReward(a.pairs[i].winner, a.pairs[i].pocket));
    EXPECT_EQ(a.pairs[i].winner.positions, b.pairs[i].winner.positions);
  }
}

TEST(Dpo, IdentityAtReference) {
  const ArchConfig arch = support::smallArch();
  Rng              init(16);
  const auto       params = initParams(arch, init);
  PreferencePair   pair;
  pair.pocket       = support::randomPocket(arch.featureDim, init);
  pair.winner       = support::randomMolecule(5, arch.numTypes, init);
  pair.loser        = support::randomMolecule(6, arch.numTypes, init);
  DpoConfig config;
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng rng(s);
    EXPECT_NEAR(pairDpoLossAndGrad(params, params, pair, rng, config).loss.total, 3.0 * std::log(2.0), 1e-6);
  }
}

TEST(Dpo, ZeroLearningRateAndFrozenReference) {
  const ArchConfig arch = support::smallArch();
  Rng              init(17);
  const auto       base = initParams(arch, init);
  std::vector<PreferencePair> pairs(3);
  for (auto& p : pairs) {
    p.pocket = support::randomPocket(arch.featureDim, init);
    p.winner = support::randomMolecule(5, arch.numTypes, init);
    p.loser  = support::randomMolecule(5, arch.numTypes, init);
  }
  DpoConfig config;
  config.steps     = 3;
  config.batchSize = 2;
  config.lr        = 0.0;
  config.lrFloor   = 0.0;
  EXPECT_EQ(trainDpo(pairs, base, config).values, base.values);

  const auto reference = base;
  TrainState state     = TrainState::start(base, 0.95, 0.999, 1e-8);
  config.lr            = 1e-3;
  for (int s = 0; s < 3; ++s) {
    dpoStep(state, reference, {&pairs[0], &pairs[1]}, Rng(s), config);
  }
  EXPECT_EQ(reference.values, base.values);
  EXPECT_NE(state.params.values, base.values);
}

TEST(Dpo, RejectsMismatchedReference) {
  Rng        init(18);
  const auto small = initParams(support::smallArch(8, 2), init);
  const auto wide  = initParams(support::smallArch(12, 2), init);
  TrainState state = TrainState::start(small, 0.95, 0.999, 1e-8);
  PreferencePair pair;
  pair.pocket = support::randomPocket(3, init);
  pair.winner = support::randomMolecule(4, 6, init);
  pair.loser  = support::randomMolecule(4, 6, init);
  EXPECT_THROW(dpoStep(state, wide, {&pair}, Rng(1), DpoConfig{}), std::invalid_argument);
}
