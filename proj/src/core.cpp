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

#include "molflow/core.h"

#include <cmath>
#include <stdexcept>

namespace molflow {

TimePoint::TimePoint(double t) : t_(t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("TimePoint: t must lie in [0, 1], got " + std::to_string(t));
  }
}

std::string ValidationResult::message() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) {
      out += "; ";
    }
    out += v;
  }
  return out;
}

bool allFinite(const Coords& x) {
  return x.allFinite();
}

ValidationResult validateMolecule(const Molecule& molecule) {
  ValidationResult result;
  const auto       n = static_cast<Eigen::Index>(molecule.types.size());
  if (n < 1) {
    result.violations.emplace_back("molecule has no atoms");
  }
  if (molecule.numTypes < 2) {
    result.violations.emplace_back("type cardinality k < 2");
  }
  if (molecule.positions.rows() != n) {
    result.violations.emplace_back("positions row count " + std::to_string(molecule.positions.rows()) +
                                   " does not match type count " + std::to_string(n));
  }
  for (int type : molecule.types) {
    if (type < 0) {
      result.violations.emplace_back("negative type index");
      break;
    }
  }
  for (int type : molecule.types) {
    if (type >= molecule.numTypes) {
      result.violations.emplace_back("type index >= k");
      break;
    }
  }
  if (!molecule.positions.allFinite()) {
    result.violations.emplace_back("non-finite position");
  }
  return result;
}

ValidationResult validatePocket(const PocketContext& pocket) {
  ValidationResult result;
  if (pocket.anchors.rows() < 1) {
    result.violations.emplace_back("pocket has no anchors");
  }
  if (!pocket.anchors.allFinite()) {
    result.violations.emplace_back("non-finite anchor");
  }
  for (double f : pocket.feature) {
    if (!std::isfinite(f)) {
      result.violations.emplace_back("non-finite pocket feature");
      break;
    }
  }
  return result;
}

ValidationResult validatePreferencePair(const PreferencePair& pair) {
  ValidationResult result = validatePocket(pair.pocket);
  for (const auto& v : validateMolecule(pair.winner).violations) {
    result.violations.push_back("winner: " + v);
  }
  for (const auto& v : validateMolecule(pair.loser).violations) {
    result.violations.push_back("loser: " + v);
  }
  if (pair.winner.numTypes != pair.loser.numTypes) {
    result.violations.emplace_back("winner and loser disagree on k");
  }
  if (!(pair.rewardWinner >= pair.rewardLoser)) {
    result.violations.emplace_back("winner reward below loser reward");
  }
  return result;
}

void requireValid(const ValidationResult& result, const std::string& what) {
  if (!result.ok()) {
    throw std::invalid_argument(what + ": " + result.message());
  }
}

Coords centerPositions(const Coords& x) {
  if (x.rows() < 1) {
    throw std::invalid_argument("centerPositions: empty coordinate block");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("centerPositions: non-finite input");
  }
  const Eigen::RowVector3d mean = x.colwise().mean();
  return x.rowwise() - mean;
}

}  // namespace molflow
