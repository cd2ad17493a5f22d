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

#include <limits>

#include "molflow/core.h"

using namespace molflow;

namespace {

Molecule threeAtoms(TypeVector types) {
  Molecule m;
  m.numTypes  = 6;
  m.positions = Coords(3, 3);
  m.positions << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  m.types = std::move(types);
  return m;
}

bool mentions(const ValidationResult& r, const std::string& needle) {
  for (const auto& v : r.violations) {
    if (v.find(needle) != std::string::npos) {
      return true;
    }
  }
  return false;
}

}  // namespace

TEST(ValidateMolecule, AcceptsWellFormed) {
  EXPECT_TRUE(validateMolecule(threeAtoms({0, 5, 2})).ok());
}

TEST(ValidateMolecule, RejectsTypeOutOfRange) {
  const auto r = validateMolecule(threeAtoms({0, 6, 2}));
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "type index >= k"));
}

TEST(ValidateMolecule, RejectsNonFinitePosition) {
  Molecule m        = threeAtoms({0, 1, 2});
  m.positions(1, 2) = std::numeric_limits<double>::quiet_NaN();
  const auto r      = validateMolecule(m);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "non-finite position"));
}

TEST(ValidateMolecule, RejectsShapeMismatch) {
  Molecule m = threeAtoms({0, 1});
  EXPECT_FALSE(validateMolecule(m).ok());
}

TEST(ValidateMolecule, RequireValidThrows) {
  EXPECT_THROW(requireValid(validateMolecule(threeAtoms({0, 6, 2})), "test"), std::invalid_argument);
}

TEST(CenterPositions, AlreadyCentered) {
  Coords x(2, 3);
  x << 1, 0, 0, -1, 0, 0;
  EXPECT_TRUE(centerPositions(x).isApprox(x));
}

TEST(CenterPositions, SinglePointMapsToOrigin) {
  Coords x(1, 3);
  x << 2, 2, 2;
  EXPECT_EQ(centerPositions(x), Coords::Zero(1, 3));
}

TEST(CenterPositions, Symmetric) {
  Coords x(2, 3);
  x << 0, 0, 0, 2, 0, 0;
  Coords expected(2, 3);
  expected << -1, 0, 0, 1, 0, 0;
  EXPECT_TRUE(centerPositions(x).isApprox(expected));
}

TEST(CenterPositions, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(centerPositions(Coords(0, 3)), std::invalid_argument);
  Coords x(1, 3);
  x << std::numeric_limits<double>::infinity(), 0, 0;
  EXPECT_THROW(centerPositions(x), std::invalid_argument);
}

TEST(TimePoint, RejectsOutsideUnitInterval) {
  EXPECT_NO_THROW(TimePoint(0.0));
  EXPECT_NO_THROW(TimePoint(1.0));
  EXPECT_THROW(TimePoint(-0.01), std::invalid_argument);
  EXPECT_THROW(TimePoint(1.01), std::invalid_argument);
  EXPECT_THROW(TimePoint(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
}

TEST(ValidatePocket, NeedsAnchors) {
  PocketContext p;
  p.anchors = Coords(0, 3);
  EXPECT_FALSE(validatePocket(p).ok());
  p.anchors = Coords::Zero(2, 3);
  EXPECT_TRUE(validatePocket(p).ok());
}

TEST(ValidatePreferencePair, ChecksBothArmsAndK) {
  PreferencePair pair;
  pair.pocket.anchors = Coords::Zero(1, 3);
  pair.winner         = threeAtoms({0, 1, 2});
  pair.loser          = threeAtoms({0, 1, 2});
  EXPECT_TRUE(validatePreferencePair(pair).ok());
  pair.loser.numTypes = 5;
  EXPECT_FALSE(validatePreferencePair(pair).ok());
}
