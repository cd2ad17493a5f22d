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

#include "molflow/sampler.h"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "molflow/parallel.h"

namespace molflow {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw std::invalid_argument("TimeGrid: need at least two points");
  }
  if (points_.front() != 0.0 || points_.back() != 1.0) {
    throw std::invalid_argument("TimeGrid: endpoints must be exactly 0 and 1");
  }
  for (size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) {
      throw std::invalid_argument("TimeGrid: points must be strictly increasing");
    }
  }
}

TimeGrid TimeGrid::twoPhase() {
  std::vector<double> pts;
  pts.reserve(101);
  for (int i = 0; i <= 60; ++i) {
    pts.push_back(0.8 * i / 60.0);
  }
  for (int i = 1; i <= 40; ++i) {
    pts.push_back(0.8 + 0.2 * i / 40.0);
  }
  pts.back() = 1.0;
  TimeGrid grid(std::move(pts));
  grid.label_ = "two-phase";
  return grid;
}

TimeGrid TimeGrid::uniform(int steps) {
  if (steps < 1) {
    throw std::invalid_argument("TimeGrid::uniform: need at least one step");
  }
  std::vector<double> pts(static_cast<size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    pts[static_cast<size_t>(i)] = static_cast<double>(i) / steps;
  }
  pts.back() = 1.0;
  TimeGrid grid(std::move(pts));
  grid.label_ = "uniform:" + std::to_string(steps);
  return grid;
}

namespace {

double parseNumber(const std::string& text, const std::string& spec) {
  std::size_t used  = 0;
  double      value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw std::invalid_argument("TimeGrid: cannot parse '" + spec + "'");
  }
  return value;
}

}  // namespace

TimeGrid TimeGrid::parse(const std::string& spec) {
  if (spec == "two-phase") {
    return twoPhase();
  }
  if (spec.rfind("uniform:", 0) == 0) {
    const double steps = parseNumber(spec.substr(8), spec);
    if (steps != std::floor(steps) || steps > 1e7) {
      throw std::invalid_argument("TimeGrid: step count must be a whole number in '" + spec + "'");
    }
    return uniform(static_cast<int>(steps));
  }
  std::vector<double> pts;
  std::stringstream   ss(spec);
  std::string         item;
  while (std::getline(ss, item, ',')) {
    pts.push_back(parseNumber(item, spec));
  }
  return TimeGrid(std::move(pts));
}

double TimeGrid::stepWidth(int step) const {
  if (step < 0 || step >= numSteps()) {
    throw std::out_of_range("TimeGrid::stepWidth: step out of range");
  }
  return points_[static_cast<size_t>(step) + 1] - points_[static_cast<size_t>(step)];
}

std::string TimeGrid::describe() const {
  if (!label_.empty()) {
    return label_;
  }
  std::string out;
  char        buf[32];
  for (double p : points_) {
    std::snprintf(buf, sizeof(buf), "%.17g", p);
    out += (out.empty() ? "" : ",") + std::string(buf);
  }
  return out;
}

Coords eulerPositionsStep(const Coords& xt, const Coords& x1Hat, TimePoint t, double dt, double eps) {
  if (xt.rows() != x1Hat.rows()) {
    throw std::invalid_argument("eulerPositionsStep: shape mismatch");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("eulerPositionsStep: dt must be > 0");
  }
  return xt + (dt / clampedRemaining(t.value(), eps)) * (x1Hat - xt);
}

std::vector<double> typeStepDistribution(int vt, const TypeDistribution& p1GivenT, TimePoint t, double dt,
                                         double eps) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("eulerTypesStep: dt must be > 0");
  }
  const RateRow       row = unconditionalRateFromModel(p1GivenT, vt, t, eps);
  std::vector<double> q(row.rates.size());
  double              total = 0.0;
  for (size_t j = 0; j < q.size(); ++j) {
    q[j] = std::max(0.0, (static_cast<int>(j) == vt ? 1.0 : 0.0) + row.rates[j] * dt);
    total += q[j];
  }
  if (!(total > 0.0)) {
    throw std::logic_error("eulerTypesStep: step distribution has no mass");
  }
  for (double& v : q) {
    v /= total;
  }
  return q;
}

TypeVector eulerTypesStep(const TypeVector& vt, const Eigen::MatrixXd& probs, TimePoint t, double dt, Rng& rng,
                          double eps) {
  if (probs.rows() != static_cast<Eigen::Index>(vt.size())) {
    throw std::invalid_argument("eulerTypesStep: shape mismatch");
  }
  // One parent draw per step; atoms use keyed children so jumps are order independent.
  const Rng  stepRng(rng.nextU64());
  TypeVector next(vt.size());
  for (size_t i = 0; i < vt.size(); ++i) {
    const auto          row = static_cast<Eigen::Index>(i);
    std::vector<double> p(static_cast<size_t>(probs.cols()));
    double              total = 0.0;
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      p[static_cast<size_t>(j)] = probs(row, j);
      total += probs(row, j);
    }
    // Softmax output can be off unit sum by a few ulps.
    for (double& v : p) {
      v /= total;
    }
    const std::vector<double> q       = typeStepDistribution(vt[i], TypeDistribution(std::move(p)), t, dt, eps);
    Rng                       atomRng = stepRng.split(i);
    next[i]                           = sampleCategorical(q, atomRng);
  }
  return next;
}

GenerationResult generateWith(const DenoiseFn& model, int numAtoms, int numTypes, const TimeGrid& grid, Rng& rng,
                              const SamplerOptions& options) {
  if (numAtoms < 1) {
    throw std::invalid_argument("generate: need at least one atom");
  }
  GenerationResult result;
  Coords           x = samplePositionPrior(numAtoms, rng, options.priorScale);
  TypeVector       v(static_cast<size_t>(numAtoms));
  for (auto& type : v) {
    type = rng.uniformInt(numTypes);
  }

  const auto& pts   = grid.points();
  const int   steps = grid.numSteps();
  for (int s = 0; s < steps; ++s) {
    const TimePoint      t(pts[static_cast<size_t>(s)]);
    const double         dt  = grid.stepWidth(s);
    const DenoiserOutput out = model(x, v, t.value());
    ++result.denoiserEvaluations;
    const Eigen::MatrixXd probs = softmaxRows(out.logits);

    if (options.projectFinal && s == steps - 1) {
      x = out.x1Hat;
      const Rng stepRng(rng.nextU64());
      for (int i = 0; i < numAtoms; ++i) {
        if (options.argmaxFinal) {
          Eigen::Index best = 0;
          probs.row(i).maxCoeff(&best);
          v[static_cast<size_t>(i)] = static_cast<int>(best);
        } else {
          std::vector<double> p(static_cast<size_t>(numTypes));
          for (int j = 0; j < numTypes; ++j) {
            p[static_cast<size_t>(j)] = probs(i, j);
          }
          Rng atomRng               = stepRng.split(static_cast<std::uint64_t>(i));
          v[static_cast<size_t>(i)] = sampleCategorical(p, atomRng);
        }
      }
    } else {
      x = eulerPositionsStep(x, out.x1Hat, t, dt, options.eps);
      v = eulerTypesStep(v, probs, t, dt, rng, options.eps);
    }
  }

  result.molecule = Molecule{x, v, numTypes};
  requireValid(validateMolecule(result.molecule), "generate");
  return result;
}

GenerationResult generate(const DenoiserParams& params, const PocketContext& pocket, int numAtoms,
                          const TimeGrid& grid, Rng& rng, const SamplerOptions& options) {
  const Eigen::VectorXd context = pocketContextVector(pocket);
  DenoiseFn             model   = [&](const Coords& x, const TypeVector& v, double t) {
    return forward(params, DenoiserInput{x, v, t, context});
  };
  return generateWith(model, numAtoms, params.arch.numTypes, grid, rng, options);
}

std::vector<Molecule> generateBatch(const DenoiserParams& params, const std::vector<PocketContext>& pockets,
                                    const std::vector<int>& atomCounts, const TimeGrid& grid, const Rng& rng,
                                    const SamplerOptions& options, int threads) {
  if (pockets.size() != atomCounts.size()) {
    throw std::invalid_argument("generateBatch: pockets and atom counts must align");
  }
  std::vector<Molecule> out(pockets.size());
  parallelFor(static_cast<int>(pockets.size()), threads, [&](int i) {
    Rng molRng = rng.split(static_cast<std::uint64_t>(i));
    out[static_cast<size_t>(i)] =
        generate(params, pockets[static_cast<size_t>(i)], atomCounts[static_cast<size_t>(i)], grid, molRng, options)
            .molecule;
  });
  return out;
}

}  // namespace molflow
