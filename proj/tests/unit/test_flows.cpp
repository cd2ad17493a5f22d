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
#include <vector>

#include "molflow/flows.h"
#include "test_support.h"

using namespace molflow;

TEST(Interpolate, Midpoint) {
  const Coords x = interpolatePositions(Coords::Zero(2, 3), Coords::Ones(2, 3), TimePoint(0.5));
  EXPECT_TRUE(x.isApprox(Coords::Constant(2, 3, 0.5)));
}

TEST(Interpolate, EndpointsExact) {
  Rng          rng(3);
  const Coords x0 = support::randomMolecule(5, 6, rng).positions;
  const Coords x1 = support::randomMolecule(5, 6, rng).positions;
  EXPECT_EQ(interpolatePositions(x0, x1, TimePoint(1.0)), x1);
  EXPECT_EQ(interpolatePositions(x0, x1, TimePoint(0.0)), x0);
}

TEST(Interpolate, HandEvaluated) {
  Coords x0(1, 3), x1(1, 3), expected(1, 3);
  x0 << 2, 0, 0;
  x1 << 0, 0, 4;
  expected << 1.5, 0, 1;
  EXPECT_TRUE(interpolatePositions(x0, x1, TimePoint(0.25)).isApprox(expected, 1e-15));
}

TEST(Interpolate, ShapeMismatchThrows) {
  EXPECT_THROW(interpolatePositions(Coords::Zero(2, 3), Coords::Zero(3, 3), TimePoint(0.5)), std::invalid_argument);
}

TEST(ConditionalVelocity, Subtraction) {
  Coords x0(1, 3), x1(1, 3), expected(1, 3);
  x0 << 1, 1, 1;
  x1 << 2, 3, 4;
  expected << 1, 2, 3;
  EXPECT_EQ(conditionalVelocity(x0, x1), expected);
  EXPECT_EQ(conditionalVelocity(x1, x1), Coords::Zero(1, 3));
}

TEST(ConditionalVelocity, EulerIntegrationReproducesTarget) {
  Rng          rng(8);
  const Coords x0 = support::randomMolecule(4, 6, rng).positions;
  const Coords x1 = support::randomMolecule(4, 6, rng).positions;
  Coords       x  = x0;
  for (int s = 0; s < 10; ++s) {
    x += 0.1 * conditionalVelocity(x0, x1);
  }
  EXPECT_TRUE(x.isApprox(x1, 1e-12));
}

TEST(PositionPrior, CenteredAndScaled) {
  Rng    rng(4);
  double sq = 0.0;
  int    n  = 0;
  for (int rep = 0; rep < 2000; ++rep) {
    const Coords x = samplePositionPrior(10, rng, 2.0);
    EXPECT_LT(x.colwise().mean().norm(), 1e-12);
    sq += x.squaredNorm();
    n += 30;
  }
  // Centering removes one of N degrees of freedom per axis: E|x_i|^2 = scale^2 (N-1)/N.
  EXPECT_NEAR(sq / n, 4.0 * 9.0 / 10.0, 0.05);
}

TEST(CorruptionDist, Boundaries) {
  const auto u = corruptionDist(1, TimePoint(0.0), 4);
  for (int j = 0; j < 4; ++j) {
    EXPECT_DOUBLE_EQ(u[j], 0.25);
  }
  const auto d = corruptionDist(2, TimePoint(1.0), 4);
  EXPECT_EQ(d.probs(), (std::vector<double>{0, 0, 1, 0}));
}

TEST(CorruptionDist, HandEvaluated) {
  const auto p = corruptionDist(2, TimePoint(0.5), 4);
  const std::vector<double> expected{0.125, 0.125, 0.625, 0.125};
  for (int j = 0; j < 4; ++j) {
    EXPECT_NEAR(p[j], expected[static_cast<size_t>(j)], 1e-15);
  }
}

TEST(CorruptionDist, RejectsBadState) {
  EXPECT_THROW(corruptionDist(4, TimePoint(0.5), 4), std::invalid_argument);
  EXPECT_THROW(corruptionDist(0, TimePoint(0.5), 1), std::invalid_argument);
}

TEST(CorruptTypes, TimeOneIsIdentity) {
  Rng              rng(1);
  const TypeVector v1{0, 3, 2, 5, 1};
  EXPECT_EQ(corruptTypes(v1, TimePoint(1.0), 6, rng), v1);
}

TEST(CorruptTypes, TimeZeroIsUniform) {
  Rng                 rng(2);
  const int           draws = 100000;
  std::vector<double> freq(4, 0.0);
  const TypeVector    v1(draws, 2);
  for (int v : corruptTypes(v1, TimePoint(0.0), 4, rng)) {
    freq[static_cast<size_t>(v)] += 1.0 / draws;
  }
  EXPECT_LT(support::totalVariation(freq, {0.25, 0.25, 0.25, 0.25}), 0.01);
}

TEST(CorruptTypes, HalfwayMatchesClosedForm) {
  Rng              rng(3);
  const int        draws = 100000;
  const TypeVector v1(draws, 2);
  int              kept  = 0;
  for (int v : corruptTypes(v1, TimePoint(0.5), 4, rng)) {
    kept += v == 2;
  }
  EXPECT_NEAR(kept / static_cast<double>(draws), 0.625, 0.01);
}

TEST(MarginalTypeDist, BoundariesAndHandValue) {
  const TypeDistribution pData({0.8, 0.2});
  EXPECT_EQ(marginalTypeDist(pData, TimePoint(0.0)).probs(), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(marginalTypeDist(pData, TimePoint(1.0)).probs(), pData.probs());
  const auto m = marginalTypeDist(pData, TimePoint(0.5));
  EXPECT_NEAR(m[0], 0.65, 1e-15);
  EXPECT_NEAR(m[1], 0.35, 1e-15);
}

TEST(MarginalTypeDist, EqualsMixtureOfCorruptions) {
  const TypeDistribution pData({0.1, 0.4, 0.2, 0.25, 0.05});
  for (double t : {0.0, 0.3, 0.77, 1.0}) {
    const auto marginal = marginalTypeDist(pData, TimePoint(t));
    for (int j = 0; j < 5; ++j) {
      double mix = 0.0;
      for (int v1 = 0; v1 < 5; ++v1) {
        mix += corruptionDist(v1, TimePoint(t), 5)[j] * pData[v1];
      }
      EXPECT_NEAR(marginal[j], mix, 1e-12);
    }
  }
}

TEST(Posterior, MatchesJointTableEnumeration) {
  // Oracle: build the joint table P(v1, v_t) = p_data(v1) * pi_t(v_t | v1) with explicit loops and condition on v_t.
  const std::vector<double> pData{0.8, 0.2};
  const double              t = 0.5;
  const int                 k = 2;
  double                    joint[2][2];
  for (int v1 = 0; v1 < k; ++v1) {
    for (int vt = 0; vt < k; ++vt) {
      joint[v1][vt] = pData[static_cast<size_t>(v1)] * ((1.0 - t) / k + (vt == v1 ? t : 0.0));
    }
  }
  const double evidence = joint[0][0] + joint[1][0];
  const auto   post     = posteriorV1GivenVt(TypeDistribution(pData), 0, TimePoint(t));
  EXPECT_NEAR(post[0], joint[0][0] / evidence, 1e-12);
  EXPECT_NEAR(post[1], joint[1][0] / evidence, 1e-12);
  EXPECT_NEAR(post[0], 0.923077, 1e-6);
  EXPECT_NEAR(post[1], 0.076923, 1e-6);
}

TEST(Posterior, Limits) {
  const TypeDistribution pData({0.5, 0.3, 0.2});
  EXPECT_EQ(posteriorV1GivenVt(pData, 1, TimePoint(0.0)).probs(), pData.probs());
  const auto nearOne = posteriorV1GivenVt(pData, 1, TimePoint(1.0 - 1e-9));
  EXPECT_NEAR(nearOne[1], 1.0, 1e-8);
  EXPECT_NEAR(posteriorV1GivenVt(pData, 1, TimePoint(1.0))[1], 1.0, 1e-15);
}

TEST(Posterior, UnreachableStateThrows) {
  const TypeDistribution pData({1.0, 0.0});
  EXPECT_THROW(posteriorV1GivenVt(pData, 1, TimePoint(1.0)), std::invalid_argument);
}

TEST(ModelRate, HandEvaluated) {
  const RateRow row = unconditionalRateFromModel(TypeDistribution({0.5, 0.3, 0.2}), 0, TimePoint(0.5));
  EXPECT_NEAR(row.rates[0], -1.0, 1e-15);
  EXPECT_NEAR(row.rates[1], 0.6, 1e-15);
  EXPECT_NEAR(row.rates[2], 0.4, 1e-15);
}

TEST(ModelRate, ConcentratedOnCurrentStateIsZero) {
  const RateRow row = unconditionalRateFromModel(TypeDistribution::delta(2, 4), 2, TimePoint(0.3));
  for (double r : row.rates) {
    EXPECT_EQ(r, 0.0);
  }
}

TEST(ModelRate, ClampNearOne) {
  const RateRow row = unconditionalRateFromModel(TypeDistribution({0.5, 0.5}), 0, TimePoint(0.9995));
  EXPECT_DOUBLE_EQ(row.rates[1], 0.5 / kTimeEps);
  EXPECT_TRUE(std::isfinite(row.rates[0]));
}

TEST(ConditionalRate, ZeroAtTargetAndHandValue) {
  for (double r : conditionalRate(2, 2, TimePoint(0.4), 3).rates) {
    EXPECT_EQ(r, 0.0);
  }
  const RateRow row = conditionalRate(0, 2, TimePoint(0.5), 3);
  EXPECT_EQ(row.rates, (std::vector<double>{-2.0, 0.0, 2.0}));
}

TEST(ConditionalRate, PosteriorExpectationIsModelRate) {
  const TypeDistribution pData({0.7, 0.3});
  for (double t : {0.1, 0.5, 0.9}) {
    for (int vt = 0; vt < 2; ++vt) {
      const TypeDistribution post = posteriorV1GivenVt(pData, vt, TimePoint(t));
      std::vector<double>    expectation(2, 0.0);
      for (int v1 = 0; v1 < 2; ++v1) {
        const RateRow row = conditionalRate(vt, v1, TimePoint(t), 2);
        for (int j = 0; j < 2; ++j) {
          expectation[static_cast<size_t>(j)] += post[v1] * row.rates[static_cast<size_t>(j)];
        }
      }
      const RateRow model = unconditionalRateFromModel(post, vt, TimePoint(t));
      for (int j = 0; j < 2; ++j) {
        EXPECT_NEAR(expectation[static_cast<size_t>(j)], model.rates[static_cast<size_t>(j)], 1e-12);
      }
    }
  }
}

TEST(RateRows, RowsSumToZero) {
  Rng rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> w(5);
    double              sum = 0.0;
    for (auto& x : w) {
      x = rng.uniform();
      sum += x;
    }
    for (auto& x : w) {
      x /= sum;
    }
    const RateRow row   = unconditionalRateFromModel(TypeDistribution(w), rng.uniformInt(5), TimePoint(rng.uniform()));
    double        total = 0.0;
    for (int j = 0; j < 5; ++j) {
      total += row.rates[static_cast<size_t>(j)];
      if (j != row.sourceState) {
        EXPECT_GE(row.rates[static_cast<size_t>(j)], 0.0);
      }
    }
    EXPECT_NEAR(total, 0.0, 1e-12);
  }
}

TEST(TypeDistribution, Validates) {
  EXPECT_THROW(TypeDistribution({0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(TypeDistribution({-0.1, 1.1}), std::invalid_argument);
  EXPECT_NO_THROW(TypeDistribution::uniform(3));
}

TEST(CorruptMolecule, SharedTimeAndShapes) {
  Rng            rng(6);
  const Molecule clean = support::randomMolecule(7, 6, rng);
  const auto     s     = corruptMolecule(clean, TimePoint(0.4), rng);
  EXPECT_EQ(s.t, 0.4);
  EXPECT_EQ(s.x1, clean.positions);
  EXPECT_TRUE(s.xt.isApprox(0.6 * s.x0 + 0.4 * s.x1, 1e-14));
  EXPECT_EQ(s.vt.size(), clean.types.size());
}
