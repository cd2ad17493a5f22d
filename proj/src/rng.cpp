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

#include "molflow/rng.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace molflow {

std::uint64_t mixSeed(std::uint64_t value) {
  value += 0x9E3779B97F4A7C15ULL;
  value = (value ^ (value >> 30)) * 0xBF58476D1CE4E5B9ULL;
  value = (value ^ (value >> 27)) * 0x94D049BB133111EBULL;
  return value ^ (value >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(mixSeed(seed)) {}

std::uint64_t Rng::nextU64() {
  return engine_();
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniformOpenLow() {
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = uniformOpenLow();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::uniformInt(int n) {
  if (n <= 0) {
    throw std::invalid_argument("Rng::uniformInt: n must be positive");
  }
  // Rejection sampling removes modulo bias.
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
  std::uint64_t       draw  = engine_();
  while (draw >= limit) {
    draw = engine_();
  }
  return static_cast<int>(draw % range);
}

Rng Rng::split(std::uint64_t key) const {
  return Rng(mixSeed(seed_ ^ mixSeed(key + 0x632BE59BD9B4E019ULL)));
}

Rng Rng::split(std::uint64_t key0, std::uint64_t key1) const {
  return split(key0).split(key1);
}

}  // namespace molflow
