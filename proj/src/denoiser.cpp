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

#include "molflow/denoiser.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace molflow {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MutBlock = Eigen::Map<MatrixXd>;

inline double sigmoid(double z) {
  return 1.0 / (1.0 + std::exp(-z));
}

inline double silu(double z) {
  return z * sigmoid(z);
}

inline double siluPrime(double z) {
  const double s = sigmoid(z);
  return s * (1.0 + z * (1.0 - s));
}

MatrixXd siluOf(const MatrixXd& z) {
  return z.unaryExpr([](double v) { return silu(v); });
}

MatrixXd siluPrimeOf(const MatrixXd& z) {
  return z.unaryExpr([](double v) { return siluPrime(v); });
}

std::string layerName(int layer, const char* suffix) {
  return "layer" + std::to_string(layer) + "." + suffix;
}

MutBlock mutableBlock(const ParamLayout& layout, VectorXd& flat, const std::string& name) {
  const ParamBlock& b = layout.find(name);
  return MutBlock(flat.data() + b.offset, b.rows, b.cols);
}

void requireFinite(const MatrixXd& m, const std::string& where) {
  if (!m.allFinite()) {
    throw std::runtime_error("denoiser: non-finite values in " + where);
  }
}

double fanInGain(const std::string& name) {
  // Coordinate weights start small so the untrained network is close to the identity map.
  if (name.ends_with("coord.w")) {
    return 0.1;
  }
  return 1.0;
}

}  // namespace

void validateArch(const ArchConfig& arch) {
  if (arch.hidden < 1) {
    throw std::invalid_argument("ArchConfig: hidden width must be >= 1");
  }
  if (arch.layers < 1) {
    throw std::invalid_argument("ArchConfig: layer count must be >= 1");
  }
  if (arch.numTypes < 2) {
    throw std::invalid_argument("ArchConfig: k must be >= 2");
  }
  if (arch.featureDim < 0) {
    throw std::invalid_argument("ArchConfig: feature dimension must be >= 0");
  }
  if (arch.timeFrequencies < 1) {
    throw std::invalid_argument("ArchConfig: need at least one time frequency");
  }
}

ParamLayout::ParamLayout(const ArchConfig& arch) {
  validateArch(arch);
  const Eigen::Index h = arch.hidden;
  add("embed.W", h, arch.inputDim());
  add("embed.b", h, 1);
  for (int l = 0; l < arch.layers; ++l) {
    add(layerName(l, "msg1.W_src"), h, h);
    add(layerName(l, "msg1.W_dst"), h, h);
    add(layerName(l, "msg1.w_dist"), h, 1);
    add(layerName(l, "msg1.b"), h, 1);
    add(layerName(l, "msg2.W"), h, h);
    add(layerName(l, "msg2.b"), h, 1);
    add(layerName(l, "coord.w"), h, 1);
    add(layerName(l, "node1.W"), h, 2 * h);
    add(layerName(l, "node1.b"), h, 1);
    add(layerName(l, "node2.W"), h, h);
    add(layerName(l, "node2.b"), h, 1);
  }
  add("head.W", arch.numTypes, h);
  add("head.b", arch.numTypes, 1);
}

void ParamLayout::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  blocks_.push_back(ParamBlock{std::move(name), total_, rows, cols});
  total_ += rows * cols;
}

const ParamBlock& ParamLayout::find(const std::string& name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) {
      return b;
    }
  }
  throw std::out_of_range("ParamLayout: no block named " + name);
}

Eigen::Map<const Eigen::MatrixXd> DenoiserParams::block(const std::string& name) const {
  const ParamBlock& b = layout.find(name);
  return Eigen::Map<const MatrixXd>(values.data() + b.offset, b.rows, b.cols);
}

DenoiserParams zeroParams(const ArchConfig& arch) {
  DenoiserParams params{arch, ParamLayout(arch), {}};
  params.values = VectorXd::Zero(params.layout.total());
  return params;
}

DenoiserParams initParams(const ArchConfig& arch, Rng& rng) {
  DenoiserParams params = zeroParams(arch);
  for (const auto& b : params.layout.blocks()) {
    // Column vectors named *.b are biases; everything else is a weight.
    if (b.name.ends_with(".b")) {
      continue;
    }
    const double fanIn = b.name.ends_with("w_dist") || b.name.ends_with("coord.w") ? static_cast<double>(b.rows)
                                                                                   : static_cast<double>(b.cols);
    const double scale = fanInGain(b.name) / std::sqrt(fanIn);
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      params.values[b.offset + i] = scale * rng.normal();
    }
  }
  return params;
}

Eigen::VectorXd pocketContextVector(const PocketContext& pocket) {
  VectorXd ctx(static_cast<Eigen::Index>(pocket.feature.size()) + 1);
  for (size_t i = 0; i < pocket.feature.size(); ++i) {
    ctx[static_cast<Eigen::Index>(i)] = pocket.feature[i];
  }
  ctx[ctx.size() - 1] = pocket.anchors.rows() > 0 ? pocket.anchors.rowwise().norm().mean() : 0.0;
  return ctx;
}

DenoiserInput makeDenoiserInput(const Coords& x, const TypeVector& types, TimePoint t, const PocketContext& pocket) {
  return DenoiserInput{x, types, t.value(), pocketContextVector(pocket)};
}

OutputCotangent OutputCotangent::zeros(int numAtoms, int numTypes) {
  return OutputCotangent{Coords::Zero(numAtoms, 3), MatrixXd::Zero(numAtoms, numTypes)};
}

Eigen::MatrixXd softmaxRows(const Eigen::MatrixXd& logits) {
  MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double maxLogit = logits.row(i).maxCoeff();
    out.row(i)            = (logits.row(i).array() - maxLogit).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

DenoiserOutput forward(const DenoiserParams& params, const DenoiserInput& input) {
  ForwardCache cache;
  return forward(params, input, cache);
}

DenoiserOutput forward(const DenoiserParams& params, const DenoiserInput& input, ForwardCache& cache) {
  const ArchConfig& arch = params.arch;
  const int         n    = static_cast<int>(input.types.size());
  const int         k    = arch.numTypes;
  if (n < 1 || input.x.rows() != n) {
    throw std::invalid_argument("denoiser: coordinate rows must match the type count and be >= 1");
  }
  if (input.context.size() != arch.contextDim()) {
    throw std::invalid_argument("denoiser: context length " + std::to_string(input.context.size()) +
                                " does not match architecture (" + std::to_string(arch.contextDim()) + ")");
  }
  if (params.values.size() != params.layout.total()) {
    throw std::invalid_argument("denoiser: parameter vector does not match layout");
  }
  if (!input.x.allFinite() || !std::isfinite(input.t)) {
    throw std::invalid_argument("denoiser: non-finite input");
  }

  cache          = ForwardCache{};
  cache.numAtoms = n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) {
        cache.pairSource.push_back(i);
        cache.pairTarget.push_back(j);
      }
    }
  }
  const auto numPairs = static_cast<Eigen::Index>(cache.pairSource.size());
  cache.pairScale     = n > 1 ? 1.0 / (n - 1) : 0.0;

  // Encoder: one-hot type, sinusoidal time, broadcast context.
  MatrixXd& a = cache.encoderIn;
  a           = MatrixXd::Zero(arch.inputDim(), n);
  const int F = arch.timeFrequencies;
  for (int i = 0; i < n; ++i) {
    const int type = input.types[static_cast<size_t>(i)];
    if (type < 0 || type >= k) {
      throw std::invalid_argument("denoiser: type index outside [0, k)");
    }
    a(type, i) = 1.0;
    for (int f = 0; f < F; ++f) {
      const double freq = F > 1 ? std::exp(std::log(50.0) * f / (F - 1)) : 1.0;
      a(k + f, i)       = std::sin(freq * input.t);
      a(k + F + f, i)   = std::cos(freq * input.t);
    }
    a.block(k + 2 * F, i, arch.contextDim(), 1) = input.context;
    a(arch.inputDim() - 1, i)                    = n / 10.0;
  }
  cache.encoderPre = (params.block("embed.W") * a).colwise() + VectorXd(params.block("embed.b"));
  MatrixXd h       = siluOf(cache.encoderPre);
  Coords   x       = input.x;
  requireFinite(h, "encoder");

  cache.layers.resize(static_cast<size_t>(arch.layers));
  for (int l = 0; l < arch.layers; ++l) {
    ForwardCache::Layer& c = cache.layers[static_cast<size_t>(l)];
    c.x                    = x;
    c.h                    = h;

    const auto wSrc  = params.block(layerName(l, "msg1.W_src"));
    const auto wDst  = params.block(layerName(l, "msg1.W_dst"));
    const auto wDist = params.block(layerName(l, "msg1.w_dist"));
    const auto b1    = params.block(layerName(l, "msg1.b"));
    const auto w2    = params.block(layerName(l, "msg2.W"));
    const auto b2    = params.block(layerName(l, "msg2.b"));
    const auto wx    = params.block(layerName(l, "coord.w"));
    const auto w3    = params.block(layerName(l, "node1.W"));
    const auto b3    = params.block(layerName(l, "node1.b"));
    const auto w4    = params.block(layerName(l, "node2.W"));
    const auto b4    = params.block(layerName(l, "node2.b"));

    const MatrixXd srcProj = wSrc * h;
    const MatrixXd dstProj = wDst * h;
    c.diff.resize(numPairs, 3);
    c.dist.resize(numPairs);
    c.pre1.resize(arch.hidden, numPairs);
    for (Eigen::Index p = 0; p < numPairs; ++p) {
      const int i   = cache.pairSource[static_cast<size_t>(p)];
      const int j   = cache.pairTarget[static_cast<size_t>(p)];
      c.diff.row(p) = x.row(i) - x.row(j);
      c.dist[p]     = c.diff.row(p).squaredNorm();
      c.pre1.col(p) = srcProj.col(i) + dstProj.col(j) + wDist.col(0) * c.dist[p] + b1.col(0);
    }
    c.edge    = siluOf(c.pre1);
    c.pre2    = (w2 * c.edge).colwise() + VectorXd(b2);
    c.message = siluOf(c.pre2);
    // tanh keeps each pair's pull below one inter-atomic distance, so repeated sampling steps cannot diverge.
    c.phi     = (wx.transpose() * c.message).transpose().array().tanh().matrix();

    // Coordinate update, then hidden update from the aggregated messages.
    Coords   xNext = x;
    MatrixXd agg   = MatrixXd::Zero(arch.hidden, n);
    for (Eigen::Index p = 0; p < numPairs; ++p) {
      const int i = cache.pairSource[static_cast<size_t>(p)];
      xNext.row(i) += cache.pairScale * c.phi[p] * c.diff.row(p);
      agg.col(i) += cache.pairScale * c.message.col(p);
    }
    c.nodeIn.resize(2 * arch.hidden, n);
    c.nodeIn.topRows(arch.hidden)    = h;
    c.nodeIn.bottomRows(arch.hidden) = agg;
    c.preNode                        = (w3 * c.nodeIn).colwise() + VectorXd(b3);
    c.update                         = siluOf(c.preNode);
    h                                = h + ((w4 * c.update).colwise() + VectorXd(b4));
    x                                = xNext;

    requireFinite(h, "layer " + std::to_string(l) + " hidden state");
    requireFinite(x, "layer " + std::to_string(l) + " coordinates");
  }
  cache.hFinal = h;

  DenoiserOutput out;
  out.x1Hat  = x.rowwise() - x.colwise().mean();
  out.logits = ((params.block("head.W") * h).colwise() + VectorXd(params.block("head.b"))).transpose();
  requireFinite(out.logits, "type head");
  return out;
}

Eigen::VectorXd backward(const DenoiserParams& params, const DenoiserInput& input, const OutputCotangent& cotangent) {
  ForwardCache cache;
  forward(params, input, cache);
  return backward(params, cache, cotangent);
}

Eigen::VectorXd backward(const DenoiserParams& params, const ForwardCache& cache, const OutputCotangent& cotangent) {
  const ArchConfig& arch = params.arch;
  const int         n    = cache.numAtoms;
  if (cotangent.x1Hat.rows() != n || cotangent.logits.rows() != n || cotangent.logits.cols() != arch.numTypes) {
    throw std::invalid_argument("denoiser backward: cotangent shape does not match the forward pass");
  }
  const auto& layout = params.layout;
  VectorXd    grad   = VectorXd::Zero(layout.total());

  // Type head.
  const MatrixXd gLogits = cotangent.logits.transpose();  // k x N
  mutableBlock(layout, grad, "head.W") += gLogits * cache.hFinal.transpose();
  mutableBlock(layout, grad, "head.b") += gLogits.rowwise().sum();
  MatrixXd gh = params.block("head.W").transpose() * gLogits;

  // Output centering is a symmetric projection.
  Coords gx = cotangent.x1Hat.rowwise() - cotangent.x1Hat.colwise().mean();

  const auto   numPairs = static_cast<Eigen::Index>(cache.pairSource.size());
  const double scale    = cache.pairScale;
  for (int l = arch.layers - 1; l >= 0; --l) {
    const ForwardCache::Layer& c = cache.layers[static_cast<size_t>(l)];

    const auto wSrc  = params.block(layerName(l, "msg1.W_src"));
    const auto wDst  = params.block(layerName(l, "msg1.W_dst"));
    const auto wDist = params.block(layerName(l, "msg1.w_dist"));
    const auto w2    = params.block(layerName(l, "msg2.W"));
    const auto wx    = params.block(layerName(l, "coord.w"));
    const auto w3    = params.block(layerName(l, "node1.W"));
    const auto w4    = params.block(layerName(l, "node2.W"));

    // Hidden residual update.
    mutableBlock(layout, grad, layerName(l, "node2.W")) += gh * c.update.transpose();
    mutableBlock(layout, grad, layerName(l, "node2.b")) += gh.rowwise().sum();
    const MatrixXd gPreNode = (w4.transpose() * gh).cwiseProduct(siluPrimeOf(c.preNode));
    mutableBlock(layout, grad, layerName(l, "node1.W")) += gPreNode * c.nodeIn.transpose();
    mutableBlock(layout, grad, layerName(l, "node1.b")) += gPreNode.rowwise().sum();
    const MatrixXd gNodeIn = w3.transpose() * gPreNode;
    MatrixXd       ghPrev  = gh + gNodeIn.topRows(arch.hidden);
    const MatrixXd gAgg    = gNodeIn.bottomRows(arch.hidden);

    // Messages receive gradient from aggregation and from the coordinate weights.
    MatrixXd gMessage(arch.hidden, numPairs);
    Coords   gDiff(numPairs, 3);
    VectorXd gPhi(numPairs);
    for (Eigen::Index p = 0; p < numPairs; ++p) {
      const int i        = cache.pairSource[static_cast<size_t>(p)];
      gMessage.col(p)    = scale * gAgg.col(i);
      gPhi[p]            = scale * gx.row(i).dot(c.diff.row(p)) * (1.0 - c.phi[p] * c.phi[p]);
      gDiff.row(p)       = scale * c.phi[p] * gx.row(i);
    }
    mutableBlock(layout, grad, layerName(l, "coord.w")) += c.message * gPhi;
    gMessage += wx.col(0) * gPhi.transpose();

    const MatrixXd gPre2 = gMessage.cwiseProduct(siluPrimeOf(c.pre2));
    mutableBlock(layout, grad, layerName(l, "msg2.W")) += gPre2 * c.edge.transpose();
    mutableBlock(layout, grad, layerName(l, "msg2.b")) += gPre2.rowwise().sum();
    const MatrixXd gPre1 = (w2.transpose() * gPre2).cwiseProduct(siluPrimeOf(c.pre1));
    mutableBlock(layout, grad, layerName(l, "msg1.b")) += gPre1.rowwise().sum();
    mutableBlock(layout, grad, layerName(l, "msg1.w_dist")) += gPre1 * c.dist;

    MatrixXd gSrc = MatrixXd::Zero(arch.hidden, n);
    MatrixXd gDst = MatrixXd::Zero(arch.hidden, n);
    Coords   gxPrev = gx;
    for (Eigen::Index p = 0; p < numPairs; ++p) {
      const int i = cache.pairSource[static_cast<size_t>(p)];
      const int j = cache.pairTarget[static_cast<size_t>(p)];
      gSrc.col(i) += gPre1.col(p);
      gDst.col(j) += gPre1.col(p);
      const double gDist = wDist.col(0).dot(gPre1.col(p));
      gDiff.row(p) += 2.0 * gDist * c.diff.row(p);
      gxPrev.row(i) += gDiff.row(p);
      gxPrev.row(j) -= gDiff.row(p);
    }
    mutableBlock(layout, grad, layerName(l, "msg1.W_src")) += gSrc * c.h.transpose();
    mutableBlock(layout, grad, layerName(l, "msg1.W_dst")) += gDst * c.h.transpose();
    ghPrev += wSrc.transpose() * gSrc + wDst.transpose() * gDst;

    gh = std::move(ghPrev);
    gx = std::move(gxPrev);
  }

  const MatrixXd gPre0 = gh.cwiseProduct(siluPrimeOf(cache.encoderPre));
  mutableBlock(layout, grad, "embed.W") += gPre0 * cache.encoderIn.transpose();
  mutableBlock(layout, grad, "embed.b") += gPre0.rowwise().sum();
  return grad;
}

}  // namespace molflow
