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

#include "molflow/dataset.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace molflow {

void validateToyConfig(const ToyDatasetConfig& c) {
  if (c.count < 1) {
    throw std::invalid_argument("dataset config: count must be >= 1");
  }
  if (c.minAtoms < 2 || c.maxAtoms < c.minAtoms) {
    throw std::invalid_argument("dataset config: need 2 <= min_atoms <= max_atoms");
  }
  if (c.numTypes < 2) {
    throw std::invalid_argument("dataset config: k must be >= 2");
  }
  if (c.numPockets < 1 || c.numAnchors < 1) {
    throw std::invalid_argument("dataset config: need at least one pocket and one anchor");
  }
  if (!(c.bondLength > 0.0) || !(c.jitter >= 0.0) || !(c.anchorScale >= 0.0)) {
    throw std::invalid_argument("dataset config: invalid geometry scale");
  }
}

Molecule templateMolecule(Template kind, int numAtoms, int numTypes, double bondLength) {
  Molecule m;
  m.numTypes  = numTypes;
  m.positions = Coords::Zero(numAtoms, 3);
  m.types.assign(static_cast<size_t>(numAtoms), 0);
  const double pi = std::numbers::pi;

  switch (kind) {
    case Template::Ring: {
      // Regular polygon with the requested edge length; alternating types 0/1.
      const double radius = bondLength / (2.0 * std::sin(pi / numAtoms));
      for (int i = 0; i < numAtoms; ++i) {
        const double angle = 2.0 * pi * i / numAtoms;
        m.positions.row(i) << radius * std::cos(angle), radius * std::sin(angle), 0.0;
        m.types[static_cast<size_t>(i)] = i % 2;
      }
      break;
    }
    case Template::Coil: {
      // Helix with 100 degree twist; radius and rise chosen so consecutive atoms sit one bond apart.
      const double twist  = 100.0 * pi / 180.0;
      const double rise   = 0.5 * bondLength / 1.4;
      const double chord  = std::sqrt(std::max(bondLength * bondLength - rise * rise, 1e-6));
      const double radius = chord / (2.0 * std::sin(twist / 2.0));
      for (int i = 0; i < numAtoms; ++i) {
        m.positions.row(i) << radius * std::cos(twist * i), radius * std::sin(twist * i), rise * i;
        m.types[static_cast<size_t>(i)] = (i % 3 == 2) ? 3 : 2;
      }
      break;
    }
    case Template::Star: {
      // Hub atom plus arms along the six axis directions, filled breadth first.
      static const double kDirs[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
      m.types[0]                      = 4;
      for (int i = 1; i < numAtoms; ++i) {
        const int arm   = (i - 1) % 6;
        const int depth = (i - 1) / 6 + 1;
        m.positions.row(i) << kDirs[arm][0], kDirs[arm][1], kDirs[arm][2];
        m.positions.row(i) *= bondLength * depth;
        m.types[static_cast<size_t>(i)] = depth == 1 ? 5 : 4;
      }
      break;
    }
  }
  for (auto& type : m.types) {
    type %= numTypes;
  }
  return m;
}

Eigen::Matrix3d randomRotation(Rng& rng) {
  // Normalized Gaussian quaternion is uniform on SO(3).
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

Dataset generateToyDataset(const ToyDatasetConfig& config, Rng& rng) {
  validateToyConfig(config);
  Rng pocketRng   = rng.split(0);
  Rng moleculeRng = rng.split(1);

  struct PocketSpec {
    Template      kind;
    PocketContext context;
  };
  std::vector<PocketSpec> pockets;
  for (int p = 0; p < config.numPockets; ++p) {
    const auto    kind = static_cast<Template>(p % kNumTemplates);
    PocketContext ctx;
    ctx.feature.assign(kNumTemplates, 0.0);
    ctx.feature[static_cast<size_t>(kind)] = 1.0;
    ctx.anchors                            = Coords(config.numAnchors, 3);
    for (int a = 0; a < config.numAnchors; ++a) {
      for (int d = 0; d < 3; ++d) {
        ctx.anchors(a, d) = config.anchorScale * pocketRng.normal();
      }
    }
    pockets.push_back(PocketSpec{kind, std::move(ctx)});
  }

  Dataset dataset;
  dataset.numTypes   = config.numTypes;
  dataset.featureDim = kNumTemplates;
  dataset.records.reserve(static_cast<size_t>(config.count));
  for (int i = 0; i < config.count; ++i) {
    const PocketSpec& pocket   = pockets[static_cast<size_t>(moleculeRng.uniformInt(config.numPockets))];
    const int         numAtoms = config.minAtoms + moleculeRng.uniformInt(config.maxAtoms - config.minAtoms + 1);
    Molecule          m        = templateMolecule(pocket.kind, numAtoms, config.numTypes, config.bondLength);
    const Eigen::Matrix3d rot  = randomRotation(moleculeRng);
    m.positions                = m.positions * rot.transpose();
    for (int a = 0; a < numAtoms; ++a) {
      for (int d = 0; d < 3; ++d) {
        m.positions(a, d) += config.jitter * moleculeRng.normal();
      }
    }
    m.positions = centerPositions(m.positions);
    requireValid(validateMolecule(m), "generateToyDataset");
    dataset.records.push_back(TrainingExample{std::move(m), pocket.context});
  }
  dataset.refreshHistogram();
  return dataset;
}

}  // namespace molflow
