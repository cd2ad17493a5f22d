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

#ifndef MOLFLOW_DENOISER_H
#define MOLFLOW_DENOISER_H

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "molflow/core.h"
#include "molflow/rng.h"

namespace molflow {

//! Shape of the message-passing denoiser.
struct ArchConfig {
  int hidden          = 64;
  int layers          = 4;
  int numTypes        = kDefaultNumTypes;
  int featureDim      = 3;  //!< length of PocketContext::feature
  int timeFrequencies = 8;

  //! Pocket feature plus one anchor descriptor (mean anchor radius).
  int contextDim() const { return featureDim + 1; }
  //! Per-atom encoder input: type one-hot, sin/cos time features, context, atom count / 10.
  int inputDim() const { return numTypes + 2 * timeFrequencies + contextDim() + 1; }

  bool operator==(const ArchConfig&) const = default;
};

//! Throws std::invalid_argument when a field is out of range.
void validateArch(const ArchConfig& arch);

struct ParamBlock {
  std::string  name;
  Eigen::Index offset = 0;
  Eigen::Index rows   = 0;
  Eigen::Index cols   = 0;

  Eigen::Index size() const { return rows * cols; }
};

//! Named, disjoint, contiguous slices of the flat parameter vector.
class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(const ArchConfig& arch);

  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  const ParamBlock&              find(const std::string& name) const;
  Eigen::Index                   total() const { return total_; }

 private:
  void add(std::string name, Eigen::Index rows, Eigen::Index cols);

  std::vector<ParamBlock> blocks_;
  Eigen::Index            total_ = 0;
};

struct DenoiserParams {
  ArchConfig      arch;
  ParamLayout     layout;
  Eigen::VectorXd values;

  Eigen::Map<const Eigen::MatrixXd> block(const std::string& name) const;
};

//! Fan-in scaled Gaussian weights, zero biases. Deterministic in the rng seed.
DenoiserParams initParams(const ArchConfig& arch, Rng& rng);
DenoiserParams zeroParams(const ArchConfig& arch);

struct DenoiserInput {
  Coords          x;
  TypeVector      types;
  double          t = 0.0;
  Eigen::VectorXd context;
};

//! Conditioning vector for the denoiser: pocket feature followed by the mean anchor radius.
Eigen::VectorXd pocketContextVector(const PocketContext& pocket);

DenoiserInput makeDenoiserInput(const Coords& x, const TypeVector& types, TimePoint t, const PocketContext& pocket);

struct DenoiserOutput {
  Coords          x1Hat;   //!< N x 3, centered
  Eigen::MatrixXd logits;  //!< N x k
};

//! Cotangent of a scalar loss with respect to DenoiserOutput.
struct OutputCotangent {
  Coords          x1Hat;
  Eigen::MatrixXd logits;

  static OutputCotangent zeros(int numAtoms, int numTypes);
};

//! Intermediates recorded by forward() for the reverse pass.
struct ForwardCache {
  struct Layer {
    Coords            x;       // N x 3 input coordinates
    Eigen::MatrixXd   h;       // H x N input hidden states
    Coords            diff;    // P x 3, x_i - x_j
    Eigen::VectorXd   dist;    // P, squared distances
    Eigen::MatrixXd   pre1;    // H x P
    Eigen::MatrixXd   edge;    // H x P
    Eigen::MatrixXd   pre2;    // H x P
    Eigen::MatrixXd   message; // H x P
    Eigen::VectorXd   phi;     // P, coordinate weights (after tanh)
    Eigen::MatrixXd   nodeIn;  // 2H x N, [h; aggregated messages]
    Eigen::MatrixXd   preNode; // H x N
    Eigen::MatrixXd   update;  // H x N
  };

  int              numAtoms = 0;
  std::vector<int> pairSource;
  std::vector<int> pairTarget;
  double           pairScale = 0.0;  // 1 / (N - 1)
  Eigen::MatrixXd  encoderIn;        // inputDim x N
  Eigen::MatrixXd  encoderPre;       // H x N
  std::vector<Layer> layers;
  Eigen::MatrixXd  hFinal;           // H x N
};

//! Permutation-equivariant, rotation-equivariant prediction of (x1_hat, type logits).
//! Throws std::runtime_error naming the layer if an intermediate goes non-finite.
DenoiserOutput forward(const DenoiserParams& params, const DenoiserInput& input);
DenoiserOutput forward(const DenoiserParams& params, const DenoiserInput& input, ForwardCache& cache);

//! d(loss)/d(params) for the loss whose output cotangent is supplied.
Eigen::VectorXd backward(const DenoiserParams& params, const ForwardCache& cache, const OutputCotangent& cotangent);
//! Convenience overload that reruns forward() to build the cache.
Eigen::VectorXd backward(const DenoiserParams& params, const DenoiserInput& input, const OutputCotangent& cotangent);

//! Row-wise softmax, N x k.
Eigen::MatrixXd softmaxRows(const Eigen::MatrixXd& logits);

}  // namespace molflow

#endif  // MOLFLOW_DENOISER_H
