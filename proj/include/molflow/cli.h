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

#ifndef MOLFLOW_CLI_H
#define MOLFLOW_CLI_H

#include <stdexcept>
#include <string>

namespace molflow::cli {

inline constexpr int kExitOk      = 0;
inline constexpr int kExitUsage   = 1;
inline constexpr int kExitRuntime = 2;

//! Bad flags, malformed or unknown config keys, invalid configuration values.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! Entry point for the molflow command line: gen-data, train, sample, build-prefs, dpo, eval.
int run(int argc, char** argv);

}  // namespace molflow::cli

#endif  // MOLFLOW_CLI_H
