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
#include <limits>
#include <numeric>

#include "molflow/denoiser.h"
#include "test_support.h"

using namespace molflow;

namespace {

DenoiserInput randomInput(int n, const ArchConfig& arch, Rng& rng, double t = 0.37) {
  const Molecule      m      = support::randomMolecule(n, arch.numTypes, rng);
  const PocketContext pocket = support::randomPocket(arch.featureDim, rng);
  return makeDenoiserInput(m.positions, m.types, TimePoint(t), pocket);
}

//! Scalar test loss: a fixed linear functional of both outputs.
double probeLoss(const DenoiserOutput& out, const OutputCotangent& c) {
  return (out.x1Hat.array() * c.x1Hat.array()).sum() + (out.logits.array() * c.logits.array()).sum();
}

OutputCotangent randomCotangent(int n, int k, Rng& rng) {
  OutputCotangent c = OutputCotangent::zeros(n, k);
  for (Eigen::Index i = 0; i < c.x1Hat.size(); ++i) {
    c.x1Hat.data()[i] = rng.normal();
  }
  for (Eigen::Index i = 0; i < c.logits.size(); ++i) {
    c.logits.data()[i] = rng.normal();
  }
  return c;
}

}  // namespace

TEST(ParamLayout, CountMatchesClosedForm) {
  const ArchConfig arch = support::smallArch(8, 2);
  const long       h = 8, in = arch.numTypes + 2 * arch.timeFrequencies + arch.featureDim + 1 + 1;
  // W_src, W_dst, msg2.W, node2.W are h x h and node1.W is h x 2h; six length-h vectors.
  const long       perLayer = 6 * h * h + 6 * h;
  const long       expected = h * in + h + 2 * perLayer + arch.numTypes * h + arch.numTypes;
  const ParamLayout layout(arch);
  EXPECT_EQ(layout.total(), expected);
  Eigen::Index covered = 0;
  for (const auto& b : layout.blocks()) {
    EXPECT_EQ(b.offset, covered);
    covered += b.size();
  }
  EXPECT_EQ(covered, layout.total());
  EXPECT_EQ(initParams(arch, *std::make_unique<Rng>(1)).values.size(), expected);
}

TEST(InitParams, DeterministicInSeed) {
  const ArchConfig arch = support::smallArch();
  Rng              a(5), b(5), c(6);
  const auto       pa = initParams(arch, a);
  const auto       pb = initParams(arch, b);
  const auto       pc = initParams(arch, c);
  EXPECT_EQ(pa.values, pb.values);
  EXPECT_NE(pa.values, pc.values);
}

TEST(ValidateArch, RejectsBadShapes) {
  ArchConfig arch = support::smallArch();
  arch.hidden     = 0;
  EXPECT_THROW(validateArch(arch), std::invalid_argument);
  arch        = support::smallArch();
  arch.layers = 0;
  EXPECT_THROW(ParamLayout{arch}, std::invalid_argument);
}

TEST(Forward, DeterministicAndShaped) {
  const ArchConfig arch = support::smallArch();
  Rng              rng(7);
  const auto       params = initParams(arch, rng);
  const auto       input  = randomInput(6, arch, rng);
  const auto       a      = forward(params, input);
  const auto       b      = forward(params, input);
  EXPECT_EQ(a.x1Hat, b.x1Hat);
  EXPECT_EQ(a.logits, b.logits);
  EXPECT_EQ(a.logits.rows(), 6);
  EXPECT_EQ(a.logits.cols(), arch.numTypes);
  EXPECT_LT(a.x1Hat.colwise().sum().norm(), 1e-12);
}

TEST(Forward, SmallInputPerturbationGivesSmallOutputChange) {
  const ArchConfig arch = support::smallArch();
  Rng              rng(13);
  const auto       params = initParams(arch, rng);
  const auto       input  = randomInput(7, arch, rng);
  const auto       base   = forward(params, input);
  for (Eigen::Index i = 0; i < input.x.size(); ++i) {
    DenoiserInput moved = input;
    moved.x.data()[i] += 1e-7;
    const auto out = forward(params, moved);
    EXPECT_LE((out.x1Hat - base.x1Hat).cwiseAbs().maxCoeff(), 1e-3) << "coordinate " << i;
    EXPECT_LE((out.logits - base.logits).cwiseAbs().maxCoeff(), 1e-3) << "coordinate " << i;
  }
}

TEST(Forward, PermutationEquivariant) {
  const ArchConfig arch = support::smallArch();
  Rng              rng(8);
  const auto       params = initParams(arch, rng);
  const auto       input  = randomInput(7, arch, rng);
  const std::vector<int> perm{3, 0, 6, 1, 5, 2, 4};
  DenoiserInput    permuted = input;
  for (int i = 0; i < 7; ++i) {
    permuted.x.row(i)                       = input.x.row(perm[static_cast<size_t>(i)]);
    permuted.types[static_cast<size_t>(i)] = input.types[static_cast<size_t>(perm[static_cast<size_t>(i)])];
  }
  const auto out  = forward(params, input);
  const auto pout = forward(params, permuted);
  for (int i = 0; i < 7; ++i) {
    EXPECT_TRUE(pout.x1Hat.row(i).isApprox(out.x1Hat.row(perm[static_cast<size_t>(i)]), 1e-12));
    EXPECT_TRUE(pout.logits.row(i).isApprox(out.logits.row(perm[static_cast<size_t>(i)]), 1e-12));
  }
}

TEST(Forward, RotationEquivariantTranslationInvariant) {
  const ArchConfig arch = support::smallArch();
  Rng              rng(9);
  const auto       params = initParams(arch, rng);
  const auto       input  = randomInput(5, arch, rng);
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, -1).normalized()).toRotationMatrix();
  DenoiserInput moved = input;
  moved.x             = (input.x * rot.transpose()).rowwise() + Eigen::RowVector3d(3.0, -1.0, 0.5);
  const auto out  = forward(params, input);
  const auto mout = forward(params, moved);
  EXPECT_TRUE(mout.x1Hat.isApprox(out.x1Hat * rot.transpose(), 1e-10));
  EXPECT_TRUE(mout.logits.isApprox(out.logits, 1e-10));
}

TEST(Forward, ZeroParamsGiveUniformTypes) {
  const ArchConfig arch = support::smallArch();
  Rng              rng(10);
  const auto       input = randomInput(4, arch, rng);
  const auto       out   = forward(zeroParams(arch), input);
  EXPECT_EQ(out.logits, Eigen::MatrixXd::Zero(4, arch.numTypes));
  EXPECT_TRUE(softmaxRows(out.logits).isApprox(Eigen::MatrixXd::Constant(4, arch.numTypes, 1.0 / arch.numTypes)));
  EXPECT_TRUE(out.x1Hat.isApprox(centerPositions(input.x), 1e-14));
}

TEST(Forward, NonFiniteIsReported) {
  const ArchConfig arch = support::smallArch();
  Rng              rng(11);
  auto             params = initParams(arch, rng);
  params.values[params.layout.find("layer1.msg2.W").offset] = std::numeric_limits<double>::infinity();
  const auto input = randomInput(4, arch, rng);
  try {
    forward(params, input);
    FAIL() << "expected a non-finite error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("layer"), std::string::npos) << e.what();
  }
}

TEST(Forward, RejectsBadInput) {
  const ArchConfig arch = support::smallArch();
  Rng              rng(12);
  const auto       params = initParams(arch, rng);
  auto             input  = randomInput(4, arch, rng);
  input.types[0]          = arch.numTypes;
  EXPECT_THROW(forward(params, input), std::invalid_argument);
  input         = randomInput(4, arch, rng);
  input.context = Eigen::VectorXd::Zero(arch.contextDim() + 1);
  EXPECT_THROW(forward(params, input), std::invalid_argument);
}

TEST(Backward, ZeroCotangentZeroGradient) {
  const ArchConfig arch = support::smallArch();
  Rng              rng(13);
  const auto       params = initParams(arch, rng);
  const auto       input  = randomInput(5, arch, rng);
  const auto       grad   = backward(params, input, OutputCotangent::zeros(5, arch.numTypes));
  EXPECT_EQ(grad, Eigen::VectorXd::Zero(params.values.size()));
}

TEST(Backward, LinearInCotangent) {
  const ArchConfig arch = support::smallArch();
  Rng              rng(14);
  const auto       params = initParams(arch, rng);
  const auto       input  = randomInput(5, arch, rng);
  const auto       c1     = randomCotangent(5, arch.numTypes, rng);
  const auto       c2     = randomCotangent(5, arch.numTypes, rng);
  const OutputCotangent sum{c1.x1Hat + c2.x1Hat, c1.logits + c2.logits};
  const auto g = backward(params, input, sum);
  EXPECT_TRUE(g.isApprox(backward(params, input, c1) + backward(params, input, c2), 1e-12));
}

TEST(Backward, MatchesCentralDifferences) {
  const ArchConfig arch = support::smallArch();
  Rng              rng(15);
  const auto       params = initParams(arch, rng);
  const auto       input  = randomInput(6, arch, rng);
  const auto       c      = randomCotangent(6, arch.numTypes, rng);
  const auto       grad   = backward(params, input, c);
  const auto       f      = [&](const DenoiserParams& p) { return probeLoss(forward(p, input), c); };
  for (Eigen::Index idx : support::probeIndices(params.values.size(), 40, rng)) {
    const double numeric = support::centralDifference(f, params, idx);
    EXPECT_LE(support::relativeError(grad[idx], numeric), 1e-4) << "parameter " << idx;
  }
}

TEST(Backward, CacheOverloadAgrees) {
  const ArchConfig arch = support::smallArch();
  Rng              rng(16);
  const auto       params = initParams(arch, rng);
  const auto       input  = randomInput(5, arch, rng);
  const auto       c      = randomCotangent(5, arch.numTypes, rng);
  ForwardCache     cache;
  forward(params, input, cache);
  EXPECT_EQ(backward(params, cache, c), backward(params, input, c));
}

TEST(Softmax, RowsSumToOneAndStable) {
  Eigen::MatrixXd logits(2, 3);
  logits << 1000, 1000, 1000, -5, 0, 5;
  const auto p = softmaxRows(logits);
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p.row(0).sum(), 1.0, 1e-15);
  EXPECT_NEAR(p(0, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.row(1).sum(), 1.0, 1e-15);
}
