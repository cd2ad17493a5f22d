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

#ifndef MOLFLOW_CORE_H
#define MOLFLOW_CORE_H

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace molflow {

//! N x 3 coordinate block, one row per atom.
using Coords     = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using TypeVector = std::vector<int>;

inline constexpr int kDefaultNumTypes = 6;

//! A point set with one categorical type per atom.
struct Molecule {
  Coords     positions;
  TypeVector types;
  int        numTypes = kDefaultNumTypes;

  int numAtoms() const { return static_cast<int>(types.size()); }
};

//! Conditioning context: anchor points plus a free-form feature vector.
struct PocketContext {
  Coords              anchors;
  std::vector<double> feature;
};

//! Time on the unit interval. Construction throws outside [0, 1].
class TimePoint {
 public:
  explicit TimePoint(double t);
  double value() const { return t_; }

 private:
  double t_;
};

//! One draw of the joint corruption process for a single molecule.
struct CorruptionSample {
  double     t = 0.0;
  Coords     x0;
  Coords     x1;
  Coords     xt;
  TypeVector v1;
  TypeVector vt;
};

struct PreferencePair {
  PocketContext pocket;
  Molecule      winner;
  Molecule      loser;
  double        rewardWinner = 0.0;
  double        rewardLoser  = 0.0;
};

//! Empty violation list means valid.
struct ValidationResult {
  std::vector<std::string> violations;

  bool        ok() const { return violations.empty(); }
  std::string message() const;
};

ValidationResult validateMolecule(const Molecule& molecule);
ValidationResult validatePocket(const PocketContext& pocket);
ValidationResult validatePreferencePair(const PreferencePair& pair);

//! Throws std::invalid_argument carrying the diagnostics when validation fails.
void requireValid(const ValidationResult& result, const std::string& what);

//! Subtracts the column means. Throws on empty or non-finite input.
Coords centerPositions(const Coords& x);

bool allFinite(const Coords& x);

}  // namespace molflow

#endif  // MOLFLOW_CORE_H
