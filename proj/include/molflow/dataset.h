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

#ifndef MOLFLOW_DATASET_H
#define MOLFLOW_DATASET_H

#include "molflow/core.h"
#include "molflow/io.h"
#include "molflow/rng.h"

namespace molflow {

enum class Template { Ring = 0, Coil = 1, Star = 2 };
inline constexpr int kNumTemplates = 3;

struct ToyDatasetConfig {
  int    count       = 2000;
  int    minAtoms    = 6;
  int    maxAtoms    = 12;
  int    numTypes    = kDefaultNumTypes;
  int    numPockets  = 100;
  double bondLength  = 1.4;
  double jitter      = 0.05;  //!< per-coordinate Gaussian noise on template atoms
  int    numAnchors  = 4;
  double anchorScale = 0.6;   //!< std-dev of anchor positions around the origin
};

void validateToyConfig(const ToyDatasetConfig& config);

//! Template geometry (uncentered, unrotated) and its type pattern.
Molecule templateMolecule(Template kind, int numAtoms, int numTypes, double bondLength);

//! Uniformly random rotation matrix.
Eigen::Matrix3d randomRotation(Rng& rng);

//! Pockets carry a one-hot template class as their feature; molecules follow their pocket's template
//! with random size, orientation and jitter, and are centered.
Dataset generateToyDataset(const ToyDatasetConfig& config, Rng& rng);

}  // namespace molflow

#endif  // MOLFLOW_DATASET_H
