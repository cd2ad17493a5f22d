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

#ifndef MOLFLOW_RNG_H
#define MOLFLOW_RNG_H

#include <cstdint>
#include <random>

namespace molflow {

//! Seeded random stream with explicit splitting.
//!
//! The underlying engine is std::mt19937_64, whose output sequence is fixed by the
//! standard. Distribution transforms are implemented here rather than through
//! <random> distributions so that streams are bit-identical across standard
//! libraries. Child streams are derived with split(key): the child seed depends
//! only on (seed, key), never on how many draws the parent has made.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  //! Raw 64-bit draw.
  std::uint64_t nextU64();
  //! Uniform double in [0, 1) with 53 bits of resolution.
  double uniform();
  //! Uniform double in (0, 1]; safe as a log argument.
  double uniformOpenLow();
  //! Standard normal via Box-Muller (one draw per call, no cached spare).
  double normal();
  //! Uniform integer in [0, n). n must be positive.
  int uniformInt(int n);

  //! Independent child stream keyed by `key`.
  Rng split(std::uint64_t key) const;
  //! Child stream keyed by two indices, e.g. (step, molecule).
  Rng split(std::uint64_t key0, std::uint64_t key1) const;

 private:
  std::uint64_t   seed_;
  std::mt19937_64 engine_;
};

//! SplitMix64 finalizer; used for seed derivation.
std::uint64_t mixSeed(std::uint64_t value);

}  // namespace molflow

#endif  // MOLFLOW_RNG_H
