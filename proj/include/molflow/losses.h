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

#ifndef MOLFLOW_LOSSES_H
#define MOLFLOW_LOSSES_H

#include <Eigen/Dense>

#include <vector>

#include "molflow/core.h"
#include "molflow/flows.h"

namespace molflow {

struct LossBreakdown {
  double pos     = 0.0;
  double type    = 0.0;
  double chamfer = 0.0;
  double total   = 0.0;
  double lambda  = 0.0;
};

struct DpoBreakdown {
  double pos        = 0.0;
  double pointCloud = 0.0;
  double type       = 0.0;
  double total      = 0.0;
  double beta       = 0.0;
};

// Base objectives -------------------------------------------------------------

//! Mean over atoms and coordinates of the squared residual.
double posLoss(const Coords& x1Hat, const Coords& x1);
Coords posLossGrad(const Coords& x1Hat, const Coords& x1);

//! Mean over atoms of -log softmax(logits)[v1].
double          typeLoss(const Eigen::MatrixXd& logits, const TypeVector& v1);
Eigen::MatrixXd typeLossGrad(const Eigen::MatrixXd& logits, const TypeVector& v1);

//! Symmetric mean nearest-neighbour Euclidean distance between two point sets.
double chamfer(const Coords& a, const Coords& b);
//! Gradient of chamfer(a, b) with respect to a (zero where a nearest distance is exactly zero).
Coords chamferGradFirst(const Coords& a, const Coords& b);

LossBreakdown totalLoss(double pos, double type, double chamferValue, double lambda);

//! Per-atom log of the model probability assigned to each clean type.
std::vector<double> logProbOfTargets(const Eigen::MatrixXd& logits, const TypeVector& v1);

// Preference objectives -------------------------------------------------------

//! Numerically stable -log(sigmoid(z)).
double negLogSigmoid(double z);
double sigmoid(double z);

//! Value of one DPO component plus its partial derivatives with respect to the
//! policy-side quantity of each arm (distance for geometric terms, mean log-probability for types).
struct DpoTerm {
  double loss        = 0.0;
  double dWinner     = 0.0;
  double dLoser      = 0.0;
};

//! Geometric DPO term: -log sigmoid(-beta (dW_theta - dW_ref - dL_theta + dL_ref)).
//! Inputs are per-arm discrepancies (prediction vs. clean target), lower is better.
DpoTerm dpoDistanceTerm(double winnerTheta, double winnerRef, double loserTheta, double loserRef, double beta);

//! Type DPO term under uniform noising:
//! -log sigmoid((beta / max(1 - t, eps)) (logratio_W - logratio_L)), where each log ratio is the atom-mean of
//! log p_theta(v1 | v_t) - log p_ref(v1 | v_t).
DpoTerm dpoTypeTerm(double winnerLogTheta, double winnerLogRef, double loserLogTheta, double loserLogRef, TimePoint t,
                    double beta, double eps = kTimeEps);

//! Predictions of one preference arm (winner or loser) under the policy and the frozen reference.
struct DpoArm {
  Coords          target;
  TypeVector      targetTypes;
  Coords          thetaX1Hat;
  Coords          refX1Hat;
  Eigen::MatrixXd thetaLogits;
  Eigen::MatrixXd refLogits;
};

double dpoPosLoss(const DpoArm& winner, const DpoArm& loser, double beta);
double dpoChamferLoss(const DpoArm& winner, const DpoArm& loser, double beta);
//! Throws std::domain_error("degenerate model output") on a zero probability.
double dpoTypeLoss(const DpoArm& winner, const DpoArm& loser, TimePoint t, double beta, double eps = kTimeEps);

//! Probability-level entry point for the type term: per-atom probabilities of the clean types.
double dpoTypeLossFromProbs(const std::vector<double>& thetaWinner, const std::vector<double>& refWinner,
                            const std::vector<double>& thetaLoser, const std::vector<double>& refLoser, TimePoint t,
                            double beta, double eps = kTimeEps);

DpoBreakdown dpoTotal(const DpoArm& winner, const DpoArm& loser, TimePoint t, double beta, double eps = kTimeEps);
DpoBreakdown dpoTotal(double pos, double pointCloud, double type, double beta);

//! Policy-side cotangents of dpoTotal for each arm.
struct DpoGradients {
  DpoBreakdown    value;
  Coords          winnerX1Hat;
  Eigen::MatrixXd winnerLogits;
  Coords          loserX1Hat;
  Eigen::MatrixXd loserLogits;
};
DpoGradients dpoTotalWithGrad(const DpoArm& winner, const DpoArm& loser, TimePoint t, double beta,
                              double eps = kTimeEps);

//! Per-atom CTMC rate-matrix divergence for one arm given the policy and reference type posteriors,
//! using the uniform-interpolant conditional rate. Used only to compare against the closed-form term.
double rateDivergence(const Eigen::MatrixXd& thetaLogits, const Eigen::MatrixXd& refLogits, const TypeVector& vt,
                      const TypeVector& v1, TimePoint t, double eps = kTimeEps);

}  // namespace molflow

#endif  // MOLFLOW_LOSSES_H
