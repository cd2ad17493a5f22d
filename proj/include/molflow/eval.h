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

#ifndef MOLFLOW_EVAL_H
#define MOLFLOW_EVAL_H

#include <vector>

#include "molflow/core.h"
#include "molflow/train.h"

namespace molflow {

struct Histogram {
  std::vector<double> edges;   //!< strictly increasing
  std::vector<double> counts;  //!< edges.size() - 1 bins
  double              total = 0.0;

  static Histogram withEdges(std::vector<double> edges);
  //! `bins` uniform bins over [lo, hi].
  static Histogram uniformBins(int bins, double lo, double hi);

  //! Adds one count; values outside the range land in the end bins.
  void add(double value, double weight = 1.0);
  std::vector<double> normalized() const;
};

//! 64 uniform bins over [0, 6].
Histogram defaultDistanceHistogram();

enum class PairMode { AllAtom, SameType };

Histogram pairwiseDistanceHist(const std::vector<Molecule>& molecules, PairMode mode, Histogram empty);
Histogram pairwiseDistanceHist(const std::vector<Molecule>& molecules, PairMode mode = PairMode::AllAtom);

//! Jensen-Shannon divergence (natural log, 0 log 0 = 0) between the normalized histograms.
double jsd(const Histogram& p, const Histogram& q);
//! Same for raw probability (or count) vectors of equal length.
double jsd(const std::vector<double>& p, const std::vector<double>& q);

//! Empirical atom-type frequencies over a molecule list (length = max k present).
std::vector<double> typeFrequencies(const std::vector<Molecule>& molecules, int numTypes);
double              typeMarginalJsd(const std::vector<Molecule>& generated, const std::vector<Molecule>& reference);

//! Mean over molecule pairs of 1 - (0.5 cos(type histograms) + 0.5 cos(distance histograms)).
double diversity(const std::vector<Molecule>& molecules);

struct RewardStats {
  double mean             = 0.0;
  double median           = 0.0;
  double fractionImproved = 0.0;  //!< share of entries strictly above the aligned baseline reward
};

RewardStats rewardStats(const std::vector<double>& rewards, const std::vector<double>& baseline = {});
RewardStats rewardStats(const std::vector<Molecule>& molecules, const std::vector<PocketContext>& pockets,
                        const std::vector<Molecule>& baseline = {}, const RewardConfig& reward = {});

}  // namespace molflow

#endif  // MOLFLOW_EVAL_H
