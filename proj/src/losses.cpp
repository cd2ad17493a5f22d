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

#include "molflow/losses.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "molflow/denoiser.h"

namespace molflow {

namespace {

void checkRows(Eigen::Index a, Eigen::Index b, const char* where) {
  if (a != b) {
    throw std::invalid_argument(std::string(where) + ": shape mismatch");
  }
}

void checkArm(const DpoArm& arm, const char* where) {
  const auto n = arm.target.rows();
  checkRows(arm.thetaX1Hat.rows(), n, where);
  checkRows(arm.refX1Hat.rows(), n, where);
  checkRows(arm.thetaLogits.rows(), static_cast<Eigen::Index>(arm.targetTypes.size()), where);
  checkRows(arm.refLogits.rows(), static_cast<Eigen::Index>(arm.targetTypes.size()), where);
  checkRows(arm.thetaLogits.cols(), arm.refLogits.cols(), where);
}

double meanOf(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) {
    s += x;
  }
  return s / static_cast<double>(v.size());
}

//! Index of the nearest row of b for each row of a, plus the distance.
void nearest(const Coords& a, const Coords& b, std::vector<int>& index, std::vector<double>& distance) {
  index.assign(static_cast<size_t>(a.rows()), 0);
  distance.assign(static_cast<size_t>(a.rows()), std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const double d = (a.row(i) - b.row(j)).norm();
      if (d < distance[static_cast<size_t>(i)]) {
        distance[static_cast<size_t>(i)] = d;
        index[static_cast<size_t>(i)]    = static_cast<int>(j);
      }
    }
  }
}

}  // namespace

double posLoss(const Coords& x1Hat, const Coords& x1) {
  checkRows(x1Hat.rows(), x1.rows(), "posLoss");
  return (x1Hat - x1).squaredNorm() / static_cast<double>(x1.size());
}

Coords posLossGrad(const Coords& x1Hat, const Coords& x1) {
  checkRows(x1Hat.rows(), x1.rows(), "posLossGrad");
  return (2.0 / static_cast<double>(x1.size())) * (x1Hat - x1);
}

std::vector<double> logProbOfTargets(const Eigen::MatrixXd& logits, const TypeVector& v1) {
  checkRows(logits.rows(), static_cast<Eigen::Index>(v1.size()), "logProbOfTargets");
  std::vector<double> out(v1.size());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int target = v1[static_cast<size_t>(i)];
    if (target < 0 || target >= logits.cols()) {
      throw std::invalid_argument("logProbOfTargets: type index outside [0, k)");
    }
    const double maxLogit = logits.row(i).maxCoeff();
    const double logZ     = maxLogit + std::log((logits.row(i).array() - maxLogit).exp().sum());
    out[static_cast<size_t>(i)] = logits(i, target) - logZ;
  }
  return out;
}

double typeLoss(const Eigen::MatrixXd& logits, const TypeVector& v1) {
  return -meanOf(logProbOfTargets(logits, v1));
}

Eigen::MatrixXd typeLossGrad(const Eigen::MatrixXd& logits, const TypeVector& v1) {
  checkRows(logits.rows(), static_cast<Eigen::Index>(v1.size()), "typeLossGrad");
  Eigen::MatrixXd grad = softmaxRows(logits);
  for (Eigen::Index i = 0; i < grad.rows(); ++i) {
    grad(i, v1[static_cast<size_t>(i)]) -= 1.0;
  }
  return grad / static_cast<double>(grad.rows());
}

double chamfer(const Coords& a, const Coords& b) {
  if (a.rows() < 1 || b.rows() < 1) {
    throw std::invalid_argument("chamfer: empty point set");
  }
  std::vector<int>    idx;
  std::vector<double> dAB;
  std::vector<double> dBA;
  nearest(a, b, idx, dAB);
  nearest(b, a, idx, dBA);
  return meanOf(dAB) + meanOf(dBA);
}

Coords chamferGradFirst(const Coords& a, const Coords& b) {
  if (a.rows() < 1 || b.rows() < 1) {
    throw std::invalid_argument("chamfer: empty point set");
  }
  std::vector<int>    idxAB;
  std::vector<int>    idxBA;
  std::vector<double> dAB;
  std::vector<double> dBA;
  nearest(a, b, idxAB, dAB);
  nearest(b, a, idxBA, dBA);
  Coords       grad = Coords::Zero(a.rows(), 3);
  const double invN = 1.0 / static_cast<double>(a.rows());
  const double invM = 1.0 / static_cast<double>(b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double d = dAB[static_cast<size_t>(i)];
    if (d > 0.0) {
      grad.row(i) += invN * (a.row(i) - b.row(idxAB[static_cast<size_t>(i)])) / d;
    }
  }
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    const double d = dBA[static_cast<size_t>(j)];
    if (d > 0.0) {
      const int i = idxBA[static_cast<size_t>(j)];
      grad.row(i) += invM * (a.row(i) - b.row(j)) / d;
    }
  }
  return grad;
}

LossBreakdown totalLoss(double pos, double type, double chamferValue, double lambda) {
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("totalLoss: lambda must be >= 0");
  }
  return LossBreakdown{pos, type, chamferValue, pos + type + lambda * chamferValue, lambda};
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double negLogSigmoid(double z) {
  // -log(sigmoid(z)) = softplus(-z)
  if (z > 0.0) {
    return std::log1p(std::exp(-z));
  }
  return -z + std::log1p(std::exp(z));
}

DpoTerm dpoDistanceTerm(double winnerTheta, double winnerRef, double loserTheta, double loserRef, double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("dpo: beta must be > 0");
  }
  const double z     = -beta * (winnerTheta - winnerRef - loserTheta + loserRef);
  const double slope = sigmoid(-z);  // d/dz of -log sigmoid(z) is -sigmoid(-z)
  return DpoTerm{negLogSigmoid(z), beta * slope, -beta * slope};
}

DpoTerm dpoTypeTerm(double winnerLogTheta, double winnerLogRef, double loserLogTheta, double loserLogRef, TimePoint t,
                    double beta, double eps) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("dpo: beta must be > 0");
  }
  const double coef  = beta / clampedRemaining(t.value(), eps);
  const double z     = coef * ((winnerLogTheta - winnerLogRef) - (loserLogTheta - loserLogRef));
  const double slope = sigmoid(-z);
  return DpoTerm{negLogSigmoid(z), -coef * slope, coef * slope};
}

double dpoPosLoss(const DpoArm& winner, const DpoArm& loser, double beta) {
  checkArm(winner, "dpoPosLoss");
  checkArm(loser, "dpoPosLoss");
  return dpoDistanceTerm(posLoss(winner.thetaX1Hat, winner.target), posLoss(winner.refX1Hat, winner.target),
                         posLoss(loser.thetaX1Hat, loser.target), posLoss(loser.refX1Hat, loser.target), beta)
      .loss;
}

double dpoChamferLoss(const DpoArm& winner, const DpoArm& loser, double beta) {
  checkArm(winner, "dpoChamferLoss");
  checkArm(loser, "dpoChamferLoss");
  return dpoDistanceTerm(chamfer(winner.target, winner.thetaX1Hat), chamfer(winner.target, winner.refX1Hat),
                         chamfer(loser.target, loser.thetaX1Hat), chamfer(loser.target, loser.refX1Hat), beta)
      .loss;
}

double dpoTypeLossFromProbs(const std::vector<double>& thetaWinner, const std::vector<double>& refWinner,
                            const std::vector<double>& thetaLoser, const std::vector<double>& refLoser, TimePoint t,
                            double beta, double eps) {
  if (thetaWinner.size() != refWinner.size() || thetaLoser.size() != refLoser.size() || thetaWinner.empty() ||
      thetaLoser.empty()) {
    throw std::invalid_argument("dpoTypeLoss: shape mismatch");
  }
  auto meanLog = [](const std::vector<double>& p) {
    double s = 0.0;
    for (double v : p) {
      if (!(v > 0.0)) {
        throw std::domain_error("degenerate model output");
      }
      s += std::log(v);
    }
    return s / static_cast<double>(p.size());
  };
  return dpoTypeTerm(meanLog(thetaWinner), meanLog(refWinner), meanLog(thetaLoser), meanLog(refLoser), t, beta, eps)
      .loss;
}

double dpoTypeLoss(const DpoArm& winner, const DpoArm& loser, TimePoint t, double beta, double eps) {
  checkArm(winner, "dpoTypeLoss");
  checkArm(loser, "dpoTypeLoss");
  auto checked = [](const std::vector<double>& logs) {
    for (double v : logs) {
      if (!std::isfinite(v)) {
        throw std::domain_error("degenerate model output");
      }
    }
    return meanOf(logs);
  };
  return dpoTypeTerm(checked(logProbOfTargets(winner.thetaLogits, winner.targetTypes)),
                     checked(logProbOfTargets(winner.refLogits, winner.targetTypes)),
                     checked(logProbOfTargets(loser.thetaLogits, loser.targetTypes)),
                     checked(logProbOfTargets(loser.refLogits, loser.targetTypes)), t, beta, eps)
      .loss;
}

DpoBreakdown dpoTotal(double pos, double pointCloud, double type, double beta) {
  return DpoBreakdown{pos, pointCloud, type, pos + pointCloud + type, beta};
}

DpoBreakdown dpoTotal(const DpoArm& winner, const DpoArm& loser, TimePoint t, double beta, double eps) {
  return dpoTotal(dpoPosLoss(winner, loser, beta), dpoChamferLoss(winner, loser, beta),
                  dpoTypeLoss(winner, loser, t, beta, eps), beta);
}

DpoGradients dpoTotalWithGrad(const DpoArm& winner, const DpoArm& loser, TimePoint t, double beta, double eps) {
  checkArm(winner, "dpoTotal");
  checkArm(loser, "dpoTotal");
  const DpoTerm pos =
      dpoDistanceTerm(posLoss(winner.thetaX1Hat, winner.target), posLoss(winner.refX1Hat, winner.target),
                      posLoss(loser.thetaX1Hat, loser.target), posLoss(loser.refX1Hat, loser.target), beta);
  const DpoTerm cloud =
      dpoDistanceTerm(chamfer(winner.target, winner.thetaX1Hat), chamfer(winner.target, winner.refX1Hat),
                      chamfer(loser.target, loser.thetaX1Hat), chamfer(loser.target, loser.refX1Hat), beta);
  const DpoTerm type = dpoTypeTerm(meanOf(logProbOfTargets(winner.thetaLogits, winner.targetTypes)),
                                   meanOf(logProbOfTargets(winner.refLogits, winner.targetTypes)),
                                   meanOf(logProbOfTargets(loser.thetaLogits, loser.targetTypes)),
                                   meanOf(logProbOfTargets(loser.refLogits, loser.targetTypes)), t, beta, eps);
  if (!std::isfinite(type.loss)) {
    throw std::domain_error("degenerate model output");
  }

  DpoGradients out;
  out.value = dpoTotal(pos.loss, cloud.loss, type.loss, beta);
  // chamfer(target, pred) is symmetric, so its gradient in pred is chamferGradFirst(pred, target).
  out.winnerX1Hat = pos.dWinner * posLossGrad(winner.thetaX1Hat, winner.target) +
                    cloud.dWinner * chamferGradFirst(winner.thetaX1Hat, winner.target);
  out.loserX1Hat = pos.dLoser * posLossGrad(loser.thetaX1Hat, loser.target) +
                   cloud.dLoser * chamferGradFirst(loser.thetaX1Hat, loser.target);
  // Mean log-probability has gradient -typeLossGrad.
  out.winnerLogits = -type.dWinner * typeLossGrad(winner.thetaLogits, winner.targetTypes);
  out.loserLogits  = -type.dLoser * typeLossGrad(loser.thetaLogits, loser.targetTypes);
  return out;
}

double rateDivergence(const Eigen::MatrixXd& thetaLogits, const Eigen::MatrixXd& refLogits, const TypeVector& vt,
                      const TypeVector& v1, TimePoint t, double eps) {
  checkRows(thetaLogits.rows(), static_cast<Eigen::Index>(vt.size()), "rateDivergence");
  checkRows(refLogits.rows(), static_cast<Eigen::Index>(vt.size()), "rateDivergence");
  const Eigen::MatrixXd pTheta = softmaxRows(thetaLogits);
  const Eigen::MatrixXd pRef   = softmaxRows(refLogits);
  const int             k      = static_cast<int>(thetaLogits.cols());
  double                total  = 0.0;
  for (size_t i = 0; i < vt.size(); ++i) {
    const auto   row   = static_cast<Eigen::Index>(i);
    const double denom = clampedRemaining(t.value(), eps);
    const RateRow conditional = conditionalRate(vt[i], v1[i], t, k, eps);
    for (int j = 0; j < k; ++j) {
      if (j == vt[i]) {
        continue;
      }
      const double rTheta = pTheta(row, j) / denom;
      const double rRef   = pRef(row, j) / denom;
      const double rq     = conditional.rates[static_cast<size_t>(j)];
      if (rq > 0.0) {
        total += rq * std::log(rTheta / rRef);
      }
      total += rRef - rTheta;
    }
  }
  return total / static_cast<double>(vt.size());
}

}  // namespace molflow
