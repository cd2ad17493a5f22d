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

#ifndef MOLFLOW_IO_H
#define MOLFLOW_IO_H

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "molflow/core.h"
#include "molflow/denoiser.h"
#include "molflow/eval.h"
#include "molflow/train.h"

namespace molflow {

inline constexpr int kDatasetFormatVersion    = 1;
inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr int kSamplesFormatVersion    = 1;
inline constexpr int kPreferenceFormatVersion = 1;

//! Newline-delimited dataset: header record, then one molecule + pocket per line.
struct Dataset {
  int                        numTypes   = kDefaultNumTypes;
  int                        featureDim = 0;
  std::map<int, long>        atomCountHistogram;
  std::vector<TrainingExample> records;

  //! Recounts atomCountHistogram from the records.
  void refreshHistogram();
  std::vector<Molecule>      molecules() const;
  std::vector<PocketContext> pockets() const;
};

//! Provenance carried by sample files.
struct SampleProvenance {
  std::string   checkpointId;
  std::string   grid;
  std::uint64_t seed = 0;
};

struct SampleFile {
  int                          numTypes = kDefaultNumTypes;
  SampleProvenance             provenance;
  std::vector<TrainingExample> records;  //!< generated molecule with the pocket it was conditioned on
};

struct PreferenceFile {
  int                         numTypes = kDefaultNumTypes;
  int                         skippedPockets = 0;
  std::vector<PreferencePair> pairs;
};

//! Writes `content` to a temporary sibling and renames it over `path`.
void writeFileAtomic(const std::string& path, const std::string& content);
std::string readFile(const std::string& path);
//! The "kind" field of a file's header record (dataset, samples, preferences, checkpoint).
std::string fileKind(const std::string& text);

std::string serializeDataset(const Dataset& dataset);
Dataset     parseDataset(const std::string& text);
void        saveDataset(const std::string& path, const Dataset& dataset);
Dataset     loadDataset(const std::string& path);

std::string serializeSamples(const SampleFile& samples);
SampleFile  parseSamples(const std::string& text);
void        saveSamples(const std::string& path, const SampleFile& samples);
SampleFile  loadSamples(const std::string& path);

std::string    serializePreferences(const PreferenceFile& prefs);
PreferenceFile parsePreferences(const std::string& text);
void           savePreferences(const std::string& path, const PreferenceFile& prefs);
PreferenceFile loadPreferences(const std::string& path);

//! Checkpoint: header {format_version, arch, k, param_count} followed by the flat parameter vector.
std::string    serializeCheckpoint(const DenoiserParams& params);
DenoiserParams parseCheckpoint(const std::string& text);
void           saveCheckpoint(const std::string& path, const DenoiserParams& params);
DenoiserParams loadCheckpoint(const std::string& path);
//! FNV-1a over the raw parameter bytes, hex encoded.
std::string checkpointId(const DenoiserParams& params);

//! Flat key=value text; '#' starts a comment. Duplicate keys are errors.
std::map<std::string, std::string> parseKeyValueConfig(const std::string& text);

//! Scalar metrics keyed by name, one JSON object.
std::string serializeMetrics(const std::map<std::string, double>& metrics);
std::map<std::string, double> parseMetrics(const std::string& text);

//! CSV with header bin_left,bin_right,count.
std::string histogramCsv(const Histogram& hist);

}  // namespace molflow

#endif  // MOLFLOW_IO_H
