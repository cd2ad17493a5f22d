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

#include "molflow/eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace molflow {

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 && nb == 0.0) {
    return 1.0;  // two molecules without pairs look alike
  }
  if (na == 0.0 || nb == 0.0) {
    return 0.0;
  }
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

double klTerm(double p, double m) {
  return p > 0.0 ? p * std::log(p / m) : 0.0;
}

}  // namespace

Histogram Histogram::withEdges(std::vector<double> edges) {
  if (edges.size() < 2) {
    throw std::invalid_argument("Histogram: need at least two edges");
  }
  for (size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw std::invalid_argument("Histogram: edges must be strictly increasing");
    }
  }
  Histogram h;
  h.counts.assign(edges.size() - 1, 0.0);
  h.edges = std::move(edges);
  return h;
}

Histogram Histogram::uniformBins(int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) {
    throw std::invalid_argument("Histogram: invalid uniform binning");
  }
  std::vector<double> edges(static_cast<size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) {
    edges[static_cast<size_t>(i)] = lo + (hi - lo) * i / bins;
  }
  return withEdges(std::move(edges));
}

void Histogram::add(double value, double weight) {
  const auto it  = std::upper_bound(edges.begin(), edges.end(), value);
  auto       bin = static_cast<long>(it - edges.begin()) - 1;
  bin            = std::clamp(bin, 0L, static_cast<long>(counts.size()) - 1);
  counts[static_cast<size_t>(bin)] += weight;
  total += weight;
}

std::vector<double> Histogram::normalized() const {
  std::vector<double> out(counts.size(), 0.0);
  if (total > 0.0) {
    for (size_t i = 0; i < counts.size(); ++i) {
      out[i] = counts[i] / total;
    }
  }
  return out;
}

Histogram defaultDistanceHistogram() {
  return Histogram::uniformBins(64, 0.0, 6.0);
}

Histogram pairwiseDistanceHist(const std::vector<Molecule>& molecules, PairMode mode, Histogram hist) {
  if (molecules.empty()) {
    throw std::invalid_argument("pairwiseDistanceHist: empty molecule list");
  }
  for (const auto& m : molecules) {
    for (int i = 0; i < m.numAtoms(); ++i) {
      for (int j = i + 1; j < m.numAtoms(); ++j) {
        if (mode == PairMode::SameType && m.types[static_cast<size_t>(i)] != m.types[static_cast<size_t>(j)]) {
          continue;
        }
        hist.add((m.positions.row(i) - m.positions.row(j)).norm());
      }
    }
  }
  return hist;
}

Histogram pairwiseDistanceHist(const std::vector<Molecule>& molecules, PairMode mode) {
  return pairwiseDistanceHist(molecules, mode, defaultDistanceHistogram());
}

double jsd(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size() || p.empty()) {
    throw std::invalid_argument("jsd: distributions must have equal, nonzero length");
  }
  const double sp = std::accumulate(p.begin(), p.end(), 0.0);
  const double sq = std::accumulate(q.begin(), q.end(), 0.0);
  if (!(sp > 0.0) || !(sq > 0.0)) {
    throw std::invalid_argument("jsd: distributions need positive mass");
  }
  double value = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i] / sp;
    const double qi = q[i] / sq;
    const double mi = 0.5 * (pi + qi);
    value += 0.5 * klTerm(pi, mi) + 0.5 * klTerm(qi, mi);
  }
  return std::clamp(value, 0.0, std::log(2.0));
}

double jsd(const Histogram& p, const Histogram& q) {
  if (p.edges != q.edges) {
    throw std::invalid_argument("jsd: histogram edges differ");
  }
  return jsd(p.counts, q.counts);
}

std::vector<double> typeFrequencies(const std::vector<Molecule>& molecules, int numTypes) {
  std::vector<double> freq(static_cast<size_t>(numTypes), 0.0);
  for (const auto& m : molecules) {
    for (int type : m.types) {
      freq.at(static_cast<size_t>(type)) += 1.0;
    }
  }
  return freq;
}

double typeMarginalJsd(const std::vector<Molecule>& generated, const std::vector<Molecule>& reference) {
  if (generated.empty() || reference.empty()) {
    throw std::invalid_argument("typeMarginalJsd: empty molecule list");
  }
  int k = 2;
  for (const auto* list : {&generated, &reference}) {
    for (const auto& m : *list) {
      k = std::max(k, m.numTypes);
    }
  }
  return jsd(typeFrequencies(generated, k), typeFrequencies(reference, k));
}

double diversity(const std::vector<Molecule>& molecules) {
  if (molecules.size() < 2) {
    throw std::invalid_argument("diversity: need at least two molecules");
  }
  int k = 2;
  for (const auto& m : molecules) {
    k = std::max(k, m.numTypes);
  }
  std::vector<std::vector<double>> typeHists;
  std::vector<std::vector<double>> distHists;
  for (const auto& m : molecules) {
    typeHists.push_back(typeFrequencies({m}, k));
    distHists.push_back(pairwiseDistanceHist({m}, PairMode::AllAtom).counts);
  }
  double total = 0.0;
  long   pairs = 0;
  for (size_t a = 0; a < molecules.size(); ++a) {
    for (size_t b = a + 1; b < molecules.size(); ++b) {
      const double similarity = 0.5 * cosine(typeHists[a], typeHists[b]) + 0.5 * cosine(distHists[a], distHists[b]);
      total += 1.0 - similarity;
      ++pairs;
    }
  }
  return std::clamp(total / static_cast<double>(pairs), 0.0, 1.0);
}

RewardStats rewardStats(const std::vector<double>& rewards, const std::vector<double>& baseline) {
  if (rewards.empty()) {
    throw std::invalid_argument("rewardStats: empty reward list");
  }
  if (!baseline.empty() && baseline.size() != rewards.size()) {
    throw std::invalid_argument("rewardStats: baseline must align with rewards");
  }
  RewardStats stats;
  stats.mean                 = std::accumulate(rewards.begin(), rewards.end(), 0.0) / rewards.size();
  std::vector<double> sorted = rewards;
  std::sort(sorted.begin(), sorted.end());
  const size_t mid = sorted.size() / 2;
  stats.median     = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  if (!baseline.empty()) {
    size_t improved = 0;
    for (size_t i = 0; i < rewards.size(); ++i) {
      if (rewards[i] > baseline[i]) {
        ++improved;
      }
    }
    stats.fractionImproved = static_cast<double>(improved) / rewards.size();
  }
  return stats;
}

RewardStats rewardStats(const std::vector<Molecule>& molecules, const std::vector<PocketContext>& pockets,
                        const std::vector<Molecule>& baseline, const RewardConfig& reward) {
  if (molecules.size() != pockets.size() || (!baseline.empty() && baseline.size() != molecules.size())) {
    throw std::invalid_argument("rewardStats: molecules, pockets and baseline must align");
  }
  std::vector<double> rewards;
  std::vector<double> baseRewards;
  for (size_t i = 0; i < molecules.size(); ++i) {
    rewards.push_back(syntheticReward(molecules[i], pockets[i], reward));
    if (!baseline.empty()) {
      baseRewards.push_back(syntheticReward(baseline[i], pockets[i], reward));
    }
  }
  return rewardStats(rewards, baseRewards);
}

}  // namespace molflow
