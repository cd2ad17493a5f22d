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

#include "molflow/io.h"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace molflow {

using nlohmann::json;

namespace {

json coordsToJson(const Coords& x) {
  json flat = json::array();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int d = 0; d < 3; ++d) {
      flat.push_back(x(i, d));
    }
  }
  return flat;
}

Coords coordsFromJson(const json& flat) {
  if (!flat.is_array() || flat.size() % 3 != 0) {
    throw std::runtime_error("coordinate list length must be a multiple of 3");
  }
  Coords x(static_cast<Eigen::Index>(flat.size() / 3), 3);
  for (size_t i = 0; i < flat.size(); ++i) {
    x(static_cast<Eigen::Index>(i / 3), static_cast<Eigen::Index>(i % 3)) = flat[i].get<double>();
  }
  return x;
}

json pocketToJson(const PocketContext& pocket) {
  return json{{"anchors", coordsToJson(pocket.anchors)}, {"feature", pocket.feature}};
}

PocketContext pocketFromJson(const json& j) {
  PocketContext pocket;
  pocket.anchors = coordsFromJson(j.at("anchors"));
  pocket.feature = j.at("feature").get<std::vector<double>>();
  requireValid(validatePocket(pocket), "pocket record");
  return pocket;
}

json moleculeToJson(const Molecule& m) {
  return json{{"positions", coordsToJson(m.positions)}, {"types", m.types}};
}

Molecule moleculeFromJson(const json& j, int numTypes) {
  Molecule m;
  m.positions = coordsFromJson(j.at("positions"));
  m.types     = j.at("types").get<TypeVector>();
  m.numTypes  = numTypes;
  requireValid(validateMolecule(m), "molecule record");
  return m;
}

json recordToJson(const TrainingExample& example) {
  json j      = moleculeToJson(example.molecule);
  j["pocket"] = pocketToJson(example.pocket);
  return j;
}

TrainingExample recordFromJson(const json& j, int numTypes) {
  return TrainingExample{moleculeFromJson(j, numTypes), pocketFromJson(j.at("pocket"))};
}

std::vector<json> parseLines(const std::string& text) {
  std::vector<json>  lines;
  std::istringstream in(text);
  std::string        line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    lines.push_back(json::parse(line));
  }
  if (lines.empty()) {
    throw std::runtime_error("file has no header record");
  }
  return lines;
}

void checkHeader(const json& header, const char* kind, int version) {
  if (header.value("kind", std::string()) != kind) {
    throw std::runtime_error(std::string("expected a ") + kind + " file");
  }
  if (header.at("format_version").get<int>() != version) {
    throw std::runtime_error(std::string("unsupported ") + kind + " format_version");
  }
}

std::string joinLines(const json& header, const std::vector<json>& records) {
  std::string out = header.dump() + "\n";
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

json archToJson(const ArchConfig& arch) {
  return json{{"hidden", arch.hidden},
              {"layers", arch.layers},
              {"num_types", arch.numTypes},
              {"feature_dim", arch.featureDim},
              {"time_frequencies", arch.timeFrequencies}};
}

ArchConfig archFromJson(const json& j) {
  ArchConfig arch;
  arch.hidden          = j.at("hidden").get<int>();
  arch.layers          = j.at("layers").get<int>();
  arch.numTypes        = j.at("num_types").get<int>();
  arch.featureDim      = j.at("feature_dim").get<int>();
  arch.timeFrequencies = j.at("time_frequencies").get<int>();
  validateArch(arch);
  return arch;
}

}  // namespace

void Dataset::refreshHistogram() {
  atomCountHistogram.clear();
  for (const auto& r : records) {
    ++atomCountHistogram[r.molecule.numAtoms()];
  }
}

std::vector<Molecule> Dataset::molecules() const {
  std::vector<Molecule> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(r.molecule);
  }
  return out;
}

std::vector<PocketContext> Dataset::pockets() const {
  std::vector<PocketContext> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(r.pocket);
  }
  return out;
}

void writeFileAtomic(const std::string& path, const std::string& content) {
  namespace fs              = std::filesystem;
  const fs::path target     = fs::path(path);
  const fs::path parent     = target.has_parent_path() ? target.parent_path() : fs::path(".");
  const fs::path temporary  = parent / ("." + target.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(temporary, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open " + temporary.string() + " for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      throw std::runtime_error("failed writing " + temporary.string());
    }
  }
  std::error_code ec;
  fs::rename(temporary, target, ec);
  if (ec) {
    fs::remove(temporary);
    throw std::runtime_error("cannot move output into place at " + path + ": " + ec.message());
  }
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fileKind(const std::string& text) {
  const auto end = text.find('\n');
  const json header = json::parse(text.substr(0, end), nullptr, false);
  if (header.is_discarded() || !header.is_object() || !header.contains("kind")) {
    throw std::runtime_error("unrecognized file: missing header record");
  }
  return header.at("kind").get<std::string>();
}

std::string serializeDataset(const Dataset& dataset) {
  json histogram = json::object();
  for (const auto& [atoms, count] : dataset.atomCountHistogram) {
    histogram[std::to_string(atoms)] = count;
  }
  const json header{{"kind", "dataset"},
                    {"format_version", kDatasetFormatVersion},
                    {"k", dataset.numTypes},
                    {"feature_dim", dataset.featureDim},
                    {"count", dataset.records.size()},
                    {"atom_count_histogram", histogram}};
  std::vector<json> records;
  records.reserve(dataset.records.size());
  for (const auto& r : dataset.records) {
    records.push_back(recordToJson(r));
  }
  return joinLines(header, records);
}

static Dataset parseDatasetUnchecked(const std::string& text) {
  const std::vector<json> lines = parseLines(text);
  const json&             header = lines.front();
  checkHeader(header, "dataset", kDatasetFormatVersion);
  Dataset dataset;
  dataset.numTypes   = header.at("k").get<int>();
  dataset.featureDim = header.at("feature_dim").get<int>();
  for (const auto& [key, value] : header.at("atom_count_histogram").items()) {
    dataset.atomCountHistogram[std::stoi(key)] = value.get<long>();
  }
  for (size_t i = 1; i < lines.size(); ++i) {
    dataset.records.push_back(recordFromJson(lines[i], dataset.numTypes));
  }
  if (header.at("count").get<size_t>() != dataset.records.size()) {
    throw std::runtime_error("dataset record count does not match header");
  }
  const std::map<int, long> declared = dataset.atomCountHistogram;
  dataset.refreshHistogram();
  if (declared != dataset.atomCountHistogram) {
    throw std::runtime_error("dataset atom-count histogram does not match its records");
  }
  return dataset;
}

void saveDataset(const std::string& path, const Dataset& dataset) {
  writeFileAtomic(path, serializeDataset(dataset));
}

Dataset loadDataset(const std::string& path) {
  return parseDataset(readFile(path));
}

std::string serializeSamples(const SampleFile& samples) {
  const json header{{"kind", "samples"},
                    {"format_version", kSamplesFormatVersion},
                    {"k", samples.numTypes},
                    {"count", samples.records.size()},
                    {"checkpoint_id", samples.provenance.checkpointId},
                    {"grid", samples.provenance.grid},
                    {"seed", samples.provenance.seed}};
  std::vector<json> records;
  for (const auto& r : samples.records) {
    records.push_back(recordToJson(r));
  }
  return joinLines(header, records);
}

static SampleFile parseSamplesUnchecked(const std::string& text) {
  const std::vector<json> lines  = parseLines(text);
  const json&             header = lines.front();
  checkHeader(header, "samples", kSamplesFormatVersion);
  SampleFile samples;
  samples.numTypes                = header.at("k").get<int>();
  samples.provenance.checkpointId = header.at("checkpoint_id").get<std::string>();
  samples.provenance.grid         = header.at("grid").get<std::string>();
  samples.provenance.seed         = header.at("seed").get<std::uint64_t>();
  for (size_t i = 1; i < lines.size(); ++i) {
    samples.records.push_back(recordFromJson(lines[i], samples.numTypes));
  }
  return samples;
}

void saveSamples(const std::string& path, const SampleFile& samples) {
  writeFileAtomic(path, serializeSamples(samples));
}

SampleFile loadSamples(const std::string& path) {
  return parseSamples(readFile(path));
}

std::string serializePreferences(const PreferenceFile& prefs) {
  const json header{{"kind", "preferences"},
                    {"format_version", kPreferenceFormatVersion},
                    {"k", prefs.numTypes},
                    {"count", prefs.pairs.size()},
                    {"skipped_pockets", prefs.skippedPockets}};
  std::vector<json> records;
  for (const auto& p : prefs.pairs) {
    records.push_back(json{{"pocket", pocketToJson(p.pocket)},
                           {"winner", moleculeToJson(p.winner)},
                           {"loser", moleculeToJson(p.loser)},
                           {"reward_w", p.rewardWinner},
                           {"reward_l", p.rewardLoser}});
  }
  return joinLines(header, records);
}

static PreferenceFile parsePreferencesUnchecked(const std::string& text) {
  const std::vector<json> lines  = parseLines(text);
  const json&             header = lines.front();
  checkHeader(header, "preferences", kPreferenceFormatVersion);
  PreferenceFile prefs;
  prefs.numTypes       = header.at("k").get<int>();
  prefs.skippedPockets = header.value("skipped_pockets", 0);
  for (size_t i = 1; i < lines.size(); ++i) {
    const json&    j = lines[i];
    PreferencePair pair{pocketFromJson(j.at("pocket")), moleculeFromJson(j.at("winner"), prefs.numTypes),
                        moleculeFromJson(j.at("loser"), prefs.numTypes), j.at("reward_w").get<double>(),
                        j.at("reward_l").get<double>()};
    requireValid(validatePreferencePair(pair), "preference record");
    prefs.pairs.push_back(std::move(pair));
  }
  return prefs;
}

void savePreferences(const std::string& path, const PreferenceFile& prefs) {
  writeFileAtomic(path, serializePreferences(prefs));
}

PreferenceFile loadPreferences(const std::string& path) {
  return parsePreferences(readFile(path));
}

std::string serializeCheckpoint(const DenoiserParams& params) {
  const json header{{"kind", "checkpoint"},
                    {"format_version", kCheckpointFormatVersion},
                    {"k", params.arch.numTypes},
                    {"arch", archToJson(params.arch)},
                    {"param_count", params.values.size()}};
  json values = json::array();
  for (Eigen::Index i = 0; i < params.values.size(); ++i) {
    values.push_back(params.values[i]);
  }
  return header.dump() + "\n" + values.dump() + "\n";
}

static DenoiserParams parseCheckpointUnchecked(const std::string& text) {
  const std::vector<json> lines = parseLines(text);
  const json&             header = lines.front();
  checkHeader(header, "checkpoint", kCheckpointFormatVersion);
  if (lines.size() != 2) {
    throw std::runtime_error("checkpoint must contain a header and one parameter record");
  }
  const ArchConfig arch = archFromJson(header.at("arch"));
  if (header.at("k").get<int>() != arch.numTypes) {
    throw std::runtime_error("checkpoint k disagrees with its architecture");
  }
  DenoiserParams params = zeroParams(arch);
  const auto     count  = header.at("param_count").get<Eigen::Index>();
  const json&    values = lines[1];
  if (count != params.layout.total() || static_cast<Eigen::Index>(values.size()) != count) {
    throw std::runtime_error("checkpoint parameter count does not match the layout total");
  }
  for (Eigen::Index i = 0; i < count; ++i) {
    params.values[i] = values[static_cast<size_t>(i)].get<double>();
  }
  if (!params.values.allFinite()) {
    throw std::runtime_error("checkpoint contains non-finite parameters");
  }
  return params;
}

void saveCheckpoint(const std::string& path, const DenoiserParams& params) {
  writeFileAtomic(path, serializeCheckpoint(params));
}

DenoiserParams loadCheckpoint(const std::string& path) {
  return parseCheckpoint(readFile(path));
}

std::string checkpointId(const DenoiserParams& params) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  const auto*   data = reinterpret_cast<const unsigned char*>(params.values.data());
  const size_t  size = static_cast<size_t>(params.values.size()) * sizeof(double);
  for (size_t i = 0; i < size; ++i) {
    hash ^= data[i];
    hash *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << hash;
  return ss.str();
}

std::map<std::string, std::string> parseKeyValueConfig(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream                 in(text);
  std::string                        line;
  int                                lineNo = 0;
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      return std::string();
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  };
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineNo) + ": expected key=value");
    }
    const std::string key   = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineNo) + ": empty key");
    }
    if (!out.emplace(key, value).second) {
      throw std::invalid_argument("config line " + std::to_string(lineNo) + ": duplicate key " + key);
    }
  }
  return out;
}

std::string serializeMetrics(const std::map<std::string, double>& metrics) {
  json j = json::object();
  for (const auto& [k, v] : metrics) {
    j[k] = v;
  }
  return j.dump(2) + "\n";
}

static std::map<std::string, double> parseMetricsUnchecked(const std::string& text) {
  std::map<std::string, double> out;
  const json                    parsed = json::parse(text);
  for (const auto& [k, v] : parsed.items()) {
    out[k] = v.get<double>();
  }
  return out;
}

std::string histogramCsv(const Histogram& hist) {
  std::ostringstream ss;
  ss << std::setprecision(17);
  ss << "bin_left,bin_right,count\n";
  for (size_t i = 0; i < hist.counts.size(); ++i) {
    ss << hist.edges[i] << ',' << hist.edges[i + 1] << ',' << hist.counts[i] << '\n';
  }
  return ss.str();
}


namespace {

//! Malformed JSON and invalid records surface as runtime errors naming the file kind.
template <typename Fn>
auto rethrowAsRuntime(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string(what) + ": malformed record (" + e.what() + ")");
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Dataset parseDataset(const std::string& text) {
  return rethrowAsRuntime("dataset", [&] { return parseDatasetUnchecked(text); });
}

SampleFile parseSamples(const std::string& text) {
  return rethrowAsRuntime("samples", [&] { return parseSamplesUnchecked(text); });
}

PreferenceFile parsePreferences(const std::string& text) {
  return rethrowAsRuntime("preferences", [&] { return parsePreferencesUnchecked(text); });
}

DenoiserParams parseCheckpoint(const std::string& text) {
  return rethrowAsRuntime("checkpoint", [&] { return parseCheckpointUnchecked(text); });
}

std::map<std::string, double> parseMetrics(const std::string& text) {
  return rethrowAsRuntime("metrics", [&] { return parseMetricsUnchecked(text); });
}

}  // namespace molflow
