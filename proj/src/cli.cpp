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

#include "molflow/cli.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "molflow/dataset.h"
#include "molflow/denoiser.h"
#include "molflow/eval.h"
#include "molflow/io.h"
#include "molflow/sampler.h"
#include "molflow/train.h"

namespace molflow::cli {

namespace {

using json = nlohmann::json;

std::string formatReal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

//! Every recognised config key with its built-in default.
std::map<std::string, std::string> builtinDefaults() {
  const ToyDatasetConfig data;
  const ArchConfig       arch;
  const TrainConfig      train;
  const DpoConfig        dpo;
  const SamplerOptions   sampler;
  const RewardConfig     reward;
  return {
      {"seed", "0"},
      {"threads", "1"},
      {"log_every", "0"},
      {"data.count", std::to_string(data.count)},
      {"data.min_atoms", std::to_string(data.minAtoms)},
      {"data.max_atoms", std::to_string(data.maxAtoms)},
      {"data.k", std::to_string(data.numTypes)},
      {"data.pockets", std::to_string(data.numPockets)},
      {"data.bond_length", formatReal(data.bondLength)},
      {"data.jitter", formatReal(data.jitter)},
      {"data.anchors", std::to_string(data.numAnchors)},
      {"data.anchor_scale", formatReal(data.anchorScale)},
      {"model.hidden", std::to_string(arch.hidden)},
      {"model.layers", std::to_string(arch.layers)},
      {"model.time_frequencies", std::to_string(arch.timeFrequencies)},
      {"train.lr", formatReal(train.lr)},
      {"train.beta1", formatReal(train.beta1)},
      {"train.beta2", formatReal(train.beta2)},
      {"train.batch", std::to_string(train.batchSize)},
      {"train.clip", formatReal(train.clipNorm)},
      {"train.decay_factor", formatReal(train.decayFactor)},
      {"train.decay_interval", std::to_string(train.decayInterval)},
      {"train.lr_floor", formatReal(train.lrFloor)},
      {"train.lambda", formatReal(train.lambda)},
      {"train.anchor_noise", formatReal(train.anchorNoise)},
      {"train.prior_scale", formatReal(train.priorScale)},
      {"train.steps", std::to_string(train.steps)},
      {"dpo.lr", formatReal(dpo.lr)},
      {"dpo.beta", formatReal(dpo.beta)},
      {"dpo.batch", std::to_string(dpo.batchSize)},
      {"dpo.clip", formatReal(dpo.clipNorm)},
      {"dpo.decay_factor", formatReal(dpo.decayFactor)},
      {"dpo.decay_interval", std::to_string(dpo.decayInterval)},
      {"dpo.lr_floor", formatReal(dpo.lrFloor)},
      {"dpo.steps", std::to_string(dpo.steps)},
      {"sample.count", "500"},
      {"sample.grid", "two-phase"},
      {"sample.eps", formatReal(sampler.eps)},
      {"sample.prior_scale", formatReal(sampler.priorScale)},
      {"sample.argmax_final", "false"},
      {"prefs.samples_per_pocket", "8"},
      {"prefs.pockets", "100"},
      {"prefs.r_min", formatReal(reward.rMin)},
  };
}

//! Layered settings: built-in defaults < config file < command-line flags.
class Settings {
 public:
  Settings() : values_(builtinDefaults()) {}

  void overlay(const std::map<std::string, std::string>& layer, const std::string& origin) {
    for (const auto& [key, value] : layer) {
      if (!values_.count(key)) {
        throw UsageError("unknown config key '" + key + "' (from " + origin + ")");
      }
      values_[key] = value;
    }
  }

  const std::string& str(const std::string& key) const { return values_.at(key); }

  long integer(const std::string& key) const {
    const std::string& s = str(key);
    long               v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw UsageError("config key '" + key + "' expects an integer, got '" + s + "'");
    }
    return v;
  }

  int integer32(const std::string& key) const {
    const long v = integer(key);
    if (v < INT32_MIN || v > INT32_MAX) {
      throw UsageError("config key '" + key + "' is out of range");
    }
    return static_cast<int>(v);
  }

  std::uint64_t unsigned64(const std::string& key) const {
    const std::string& s = str(key);
    std::uint64_t      v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw UsageError("config key '" + key + "' expects an unsigned integer, got '" + s + "'");
    }
    return v;
  }

  double real(const std::string& key) const {
    const std::string& s = str(key);
    std::size_t        used = 0;
    double             v    = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
      throw UsageError("config key '" + key + "' expects a finite number, got '" + s + "'");
    }
    return v;
  }

  bool boolean(const std::string& key) const {
    const std::string& s = str(key);
    if (s == "true" || s == "1") {
      return true;
    }
    if (s == "false" || s == "0") {
      return false;
    }
    throw UsageError("config key '" + key + "' expects true/false, got '" + s + "'");
  }

 private:
  std::map<std::string, std::string> values_;
};

//! Flags shared by every command plus per-command aliases for config keys.
struct CommandOptions {
  std::string                        configPath;
  std::string                        out;
  std::optional<std::uint64_t>       seed;
  std::optional<int>                 threads;
  std::vector<std::string>           sets;
  std::map<std::string, std::string> aliases;  //!< config key -> raw flag value

  Settings resolve() const {
    Settings settings;
    if (!configPath.empty()) {
      std::map<std::string, std::string> fileValues;
      try {
        fileValues = parseKeyValueConfig(readFile(configPath));
      } catch (const std::exception& e) {
        throw UsageError("config " + configPath + ": " + e.what());
      }
      settings.overlay(fileValues, configPath);
    }
    std::map<std::string, std::string> flags;
    for (const auto& assignment : sets) {
      const auto eq = assignment.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw UsageError("--set expects KEY=VALUE, got '" + assignment + "'");
      }
      flags[assignment.substr(0, eq)] = assignment.substr(eq + 1);
    }
    for (const auto& [key, value] : aliases) {
      flags[key] = value;
    }
    if (seed) {
      flags["seed"] = std::to_string(*seed);
    }
    if (threads) {
      flags["threads"] = std::to_string(*threads);
    }
    settings.overlay(flags, "command line");
    return settings;
  }
};

CLI::App* addCommand(CLI::App& app, const std::string& name, const std::string& help, CommandOptions& opts,
                     const std::string& outHelp) {
  CLI::App* cmd = app.add_subcommand(name, help);
  cmd->add_option("--config", opts.configPath, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "root random seed");
  cmd->add_option("--out", opts.out, outHelp)->required();
  cmd->add_option("--threads", opts.threads, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--set", opts.sets, "override a config key, KEY=VALUE (repeatable)");
  return cmd;
}

void addAlias(CLI::App* cmd, CommandOptions& opts, const std::string& flag, const std::string& key,
              const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&opts, key](const std::string& value) { opts.aliases[key] = value; }, help + " [" + key + "]");
}

//! Converts std::invalid_argument raised by a validator into a usage error.
template <typename Fn>
void validated(Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

ToyDatasetConfig dataConfig(const Settings& s) {
  ToyDatasetConfig c;
  c.count       = s.integer32("data.count");
  c.minAtoms    = s.integer32("data.min_atoms");
  c.maxAtoms    = s.integer32("data.max_atoms");
  c.numTypes    = s.integer32("data.k");
  c.numPockets  = s.integer32("data.pockets");
  c.bondLength  = s.real("data.bond_length");
  c.jitter      = s.real("data.jitter");
  c.numAnchors  = s.integer32("data.anchors");
  c.anchorScale = s.real("data.anchor_scale");
  validated([&] { validateToyConfig(c); });
  return c;
}

ArchConfig archConfig(const Settings& s, int numTypes, int featureDim) {
  ArchConfig a;
  a.hidden          = s.integer32("model.hidden");
  a.layers          = s.integer32("model.layers");
  a.timeFrequencies = s.integer32("model.time_frequencies");
  a.numTypes        = numTypes;
  a.featureDim      = featureDim;
  validated([&] { validateArch(a); });
  return a;
}

TrainConfig trainConfig(const Settings& s) {
  TrainConfig c;
  c.lr            = s.real("train.lr");
  c.beta1         = s.real("train.beta1");
  c.beta2         = s.real("train.beta2");
  c.batchSize     = s.integer32("train.batch");
  c.clipNorm      = s.real("train.clip");
  c.decayFactor   = s.real("train.decay_factor");
  c.decayInterval = s.integer32("train.decay_interval");
  c.lrFloor       = s.real("train.lr_floor");
  c.lambda        = s.real("train.lambda");
  c.anchorNoise   = s.real("train.anchor_noise");
  c.priorScale    = s.real("train.prior_scale");
  c.steps         = s.integer32("train.steps");
  c.seed          = s.unsigned64("seed");
  c.threads       = s.integer32("threads");
  validated([&] { validateConfig(c); });
  return c;
}

DpoConfig dpoConfig(const Settings& s, double priorScale) {
  DpoConfig c;
  c.lr            = s.real("dpo.lr");
  c.beta          = s.real("dpo.beta");
  c.batchSize     = s.integer32("dpo.batch");
  c.clipNorm      = s.real("dpo.clip");
  c.decayFactor   = s.real("dpo.decay_factor");
  c.decayInterval = s.integer32("dpo.decay_interval");
  c.lrFloor       = s.real("dpo.lr_floor");
  c.steps         = s.integer32("dpo.steps");
  c.priorScale    = priorScale;
  c.seed          = s.unsigned64("seed");
  c.threads       = s.integer32("threads");
  validated([&] { validateConfig(c); });
  return c;
}

SamplerOptions samplerOptions(const Settings& s) {
  SamplerOptions o;
  o.eps         = s.real("sample.eps");
  o.priorScale  = s.real("sample.prior_scale");
  o.argmaxFinal = s.boolean("sample.argmax_final");
  if (!(o.eps > 0.0 && o.eps < 1.0) || !(o.priorScale > 0.0)) {
    throw UsageError("sample.eps must lie in (0, 1) and sample.prior_scale must be positive");
  }
  return o;
}

TimeGrid timeGrid(const Settings& s) {
  try {
    return TimeGrid::parse(s.str("sample.grid"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("sample.grid: ") + e.what());
  }
}

int threadCount(const Settings& s) {
  const int threads = s.integer32("threads");
  if (threads < 1) {
    throw UsageError("threads must be >= 1");
  }
  return threads;
}

//! Draws an atom count from the dataset's empirical histogram.
int drawAtomCount(const std::map<int, long>& histogram, Rng& rng) {
  long total = 0;
  for (const auto& [n, count] : histogram) {
    total += count;
  }
  if (total <= 0) {
    throw std::runtime_error("dataset atom-count histogram is empty");
  }
  double target = rng.uniform() * static_cast<double>(total);
  for (const auto& [n, count] : histogram) {
    target -= static_cast<double>(count);
    if (target < 0.0) {
      return n;
    }
  }
  return histogram.rbegin()->first;
}

//! JSONL metrics log accumulated in memory and written atomically at the end of the run.
class MetricsLog {
 public:
  MetricsLog(std::string path, long logEvery, std::string label)
      : path_(std::move(path)), logEvery_(logEvery), label_(std::move(label)) {}

  void record(const StepReport& report, const json& losses) {
    if (!path_.empty()) {
      json line{{"step", report.step}, {"lr", report.lr}, {"wall", report.wallSeconds}, {"losses", losses}};
      buffer_ += line.dump() + "\n";
    }
    if (logEvery_ > 0 && report.step % logEvery_ == 0) {
      std::cerr << label_ << " step " << report.step << " loss " << losses.at("total").get<double>() << " lr "
                << report.lr << " (" << report.wallSeconds << " s)\n";
    }
  }

  void flush() const {
    if (!path_.empty()) {
      writeFileAtomic(path_, buffer_);
    }
  }

 private:
  std::string path_;
  long        logEvery_;
  std::string label_;
  std::string buffer_;
};

std::vector<Molecule> loadMoleculeSet(const std::string& path) {
  const std::string text = readFile(path);
  const std::string kind = fileKind(text);
  if (kind == "dataset") {
    return parseDataset(text).molecules();
  }
  if (kind == "samples") {
    std::vector<Molecule> out;
    for (auto& r : parseSamples(text).records) {
      out.push_back(std::move(r.molecule));
    }
    return out;
  }
  throw std::runtime_error(path + ": expected a dataset or samples file, found '" + kind + "'");
}

// Commands ----------------------------------------------------------------------

void cmdGenData(const CommandOptions& opts) {
  const Settings         s      = opts.resolve();
  const ToyDatasetConfig config = dataConfig(s);
  Rng                    rng(s.unsigned64("seed"));
  const Dataset          dataset = generateToyDataset(config, rng);
  saveDataset(opts.out, dataset);
  std::cerr << "wrote " << dataset.records.size() << " molecules to " << opts.out << "\n";
}

void cmdTrain(const CommandOptions& opts, const std::string& dataPath, const std::string& metricsPath,
              const std::string& initPath) {
  const Settings    s       = opts.resolve();
  const TrainConfig config  = trainConfig(s);
  const Dataset     dataset = loadDataset(dataPath);
  const ArchConfig  arch    = archConfig(s, dataset.numTypes, dataset.featureDim);

  DenoiserParams initial;
  if (!initPath.empty()) {
    initial = loadCheckpoint(initPath);
    if (!(initial.arch == arch)) {
      throw UsageError("--init checkpoint architecture does not match the configured model");
    }
  } else {
    Rng initRng = Rng(config.seed).split(~std::uint64_t{0});
    initial     = initParams(arch, initRng);
  }

  MetricsLog log(metricsPath, s.integer("log_every"), "train");
  const DenoiserParams trained = trainModel(dataset.records, std::move(initial), config, [&](const StepReport& r) {
    log.record(r, json{{"pos", r.loss.pos}, {"type", r.loss.type}, {"chamfer", r.loss.chamfer}, {"total", r.loss.total}});
  });
  saveCheckpoint(opts.out, trained);
  log.flush();
  std::cerr << "trained " << config.steps << " steps; checkpoint " << checkpointId(trained) << " -> " << opts.out
            << "\n";
}

void cmdSample(const CommandOptions& opts, const std::string& checkpointPath, const std::string& dataPath) {
  const Settings       s       = opts.resolve();
  const SamplerOptions options = samplerOptions(s);
  const TimeGrid       grid    = timeGrid(s);
  const int            count   = s.integer32("sample.count");
  const int            threads = threadCount(s);
  if (count < 1) {
    throw UsageError("sample.count must be >= 1");
  }
  const DenoiserParams params  = loadCheckpoint(checkpointPath);
  const Dataset        dataset = loadDataset(dataPath);
  if (dataset.records.empty()) {
    throw std::runtime_error(dataPath + ": no records to draw pockets from");
  }
  if (dataset.numTypes != params.arch.numTypes || dataset.featureDim != params.arch.featureDim) {
    throw std::runtime_error("dataset and checkpoint disagree on k or pocket feature size");
  }

  const std::uint64_t seed = s.unsigned64("seed");
  const Rng           root(seed);
  Rng                 pick = root.split(0);
  std::vector<PocketContext> pockets;
  std::vector<int>           atomCounts;
  for (int i = 0; i < count; ++i) {
    const auto& record = dataset.records[static_cast<size_t>(pick.uniformInt(static_cast<int>(dataset.records.size())))];
    pockets.push_back(record.pocket);
    atomCounts.push_back(drawAtomCount(dataset.atomCountHistogram, pick));
  }
  const std::vector<Molecule> molecules =
      generateBatch(params, pockets, atomCounts, grid, root.split(1), options, threads);

  SampleFile file;
  file.numTypes   = params.arch.numTypes;
  file.provenance = SampleProvenance{checkpointId(params), grid.describe(), seed};
  for (int i = 0; i < count; ++i) {
    file.records.push_back(TrainingExample{molecules[static_cast<size_t>(i)], pockets[static_cast<size_t>(i)]});
  }
  saveSamples(opts.out, file);
  std::cerr << "wrote " << count << " samples to " << opts.out << "\n";
}

void cmdBuildPrefs(const CommandOptions& opts, const std::string& checkpointPath, const std::string& dataPath) {
  const Settings       s               = opts.resolve();
  const SamplerOptions options         = samplerOptions(s);
  const TimeGrid       grid            = timeGrid(s);
  const int            threads         = threadCount(s);
  const int            samplesPerPocket = s.integer32("prefs.samples_per_pocket");
  const int            numPockets      = s.integer32("prefs.pockets");
  RewardConfig         reward;
  reward.rMin = s.real("prefs.r_min");
  if (samplesPerPocket < 2 || numPockets < 1 || !(reward.rMin > 0.0)) {
    throw UsageError("prefs.samples_per_pocket must be >= 2, prefs.pockets >= 1, prefs.r_min > 0");
  }
  const DenoiserParams params  = loadCheckpoint(checkpointPath);
  const Dataset        dataset = loadDataset(dataPath);

  std::vector<PocketRequest> requests;
  for (size_t i = 0; i < dataset.records.size() && requests.size() < static_cast<size_t>(numPockets); ++i) {
    requests.push_back(PocketRequest{dataset.records[i].pocket, dataset.records[i].molecule.numAtoms()});
  }
  const PreferenceBuildResult result = buildPreferencePairs(params, requests, samplesPerPocket,
                                                            Rng(s.unsigned64("seed")), grid, reward, options, threads);
  PreferenceFile file;
  file.numTypes       = params.arch.numTypes;
  file.skippedPockets = result.skippedPockets;
  file.pairs          = result.pairs;
  savePreferences(opts.out, file);
  std::cerr << "wrote " << file.pairs.size() << " preference pairs (" << file.skippedPockets
            << " pockets skipped) to " << opts.out << "\n";
}

void cmdDpo(const CommandOptions& opts, const std::string& checkpointPath, const std::string& prefsPath,
            const std::string& metricsPath) {
  const Settings       s      = opts.resolve();
  const DpoConfig      config = dpoConfig(s, s.real("train.prior_scale"));
  const DenoiserParams base   = loadCheckpoint(checkpointPath);
  const PreferenceFile prefs  = loadPreferences(prefsPath);
  if (prefs.numTypes != base.arch.numTypes) {
    throw std::runtime_error("preference file and checkpoint disagree on k");
  }

  MetricsLog log(metricsPath, s.integer("log_every"), "dpo");
  const DenoiserParams tuned = trainDpo(prefs.pairs, base, config, [&](const StepReport& r) {
    log.record(r, json{{"pos", r.dpo.pos}, {"point_cloud", r.dpo.pointCloud}, {"type", r.dpo.type}, {"total", r.dpo.total}});
  });
  saveCheckpoint(opts.out, tuned);
  log.flush();
  std::cerr << "fine-tuned " << config.steps << " steps; checkpoint " << checkpointId(tuned) << " -> " << opts.out
            << "\n";
}

void cmdEval(const CommandOptions& opts, const std::string& samplesPath, const std::string& referencePath,
             const std::string& baselinePath, const std::string& histPath) {
  const Settings s = opts.resolve();
  RewardConfig   reward;
  reward.rMin = s.real("prefs.r_min");

  const SampleFile            samples   = loadSamples(samplesPath);
  const std::vector<Molecule> reference = loadMoleculeSet(referencePath);
  std::vector<Molecule>       generated;
  std::vector<PocketContext>  pockets;
  for (const auto& r : samples.records) {
    generated.push_back(r.molecule);
    pockets.push_back(r.pocket);
  }
  if (generated.size() < 2 || reference.empty()) {
    throw std::runtime_error("eval needs at least two samples and a non-empty reference set");
  }

  const Histogram genAll = pairwiseDistanceHist(generated, PairMode::AllAtom);
  std::map<std::string, double> metrics;
  metrics["num_samples"]            = static_cast<double>(generated.size());
  metrics["num_reference"]          = static_cast<double>(reference.size());
  metrics["distance_jsd_all_atom"]  = jsd(genAll, pairwiseDistanceHist(reference, PairMode::AllAtom));
  const Histogram genSame = pairwiseDistanceHist(generated, PairMode::SameType);
  const Histogram refSame = pairwiseDistanceHist(reference, PairMode::SameType);
  if (genSame.total > 0.0 && refSame.total > 0.0) {
    metrics["distance_jsd_same_type"] = jsd(genSame, refSame);
  }
  metrics["type_jsd"]               = typeMarginalJsd(generated, reference);
  metrics["diversity"]              = diversity(generated);

  std::vector<double> rewards;
  for (size_t i = 0; i < generated.size(); ++i) {
    rewards.push_back(syntheticReward(generated[i], pockets[i], reward));
  }
  if (!baselinePath.empty()) {
    const SampleFile      baseline = loadSamples(baselinePath);
    std::vector<Molecule> baseMolecules;
    std::vector<double>   baseRewards;
    for (const auto& r : baseline.records) {
      baseMolecules.push_back(r.molecule);
      baseRewards.push_back(syntheticReward(r.molecule, r.pocket, reward));
    }
    const RewardStats baseStats = rewardStats(baseRewards);
    // Per-sample comparison is only meaningful when both files were drawn for the same pockets.
    const bool aligned = baseRewards.size() == rewards.size();
    const RewardStats stats = rewardStats(rewards, aligned ? baseRewards : std::vector<double>{});
    metrics["baseline_reward_mean"] = baseStats.mean;
    metrics["baseline_diversity"]   = diversity(baseMolecules);
    metrics["reward_improvement"]   = (stats.mean - baseStats.mean) / std::max(std::abs(baseStats.mean), 1e-12);
    metrics["diversity_ratio"]      = metrics["diversity"] / std::max(metrics["baseline_diversity"], 1e-12);
    if (aligned) {
      metrics["fraction_improved"] = stats.fractionImproved;
    }
  }
  const RewardStats stats = rewardStats(rewards);
  metrics["reward_mean"]   = stats.mean;
  metrics["reward_median"] = stats.median;

  writeFileAtomic(opts.out, serializeMetrics(metrics));
  if (!histPath.empty()) {
    writeFileAtomic(histPath, histogramCsv(genAll));
  }
  std::cerr << "distance JSD " << metrics["distance_jsd_all_atom"] << ", type JSD " << metrics["type_jsd"]
            << ", diversity " << metrics["diversity"] << ", mean reward " << stats.mean << " -> " << opts.out << "\n";
}

std::string versionText() {
  std::ostringstream ss;
  ss << "molflow " << MOLFLOW_VERSION << "\n"
     << "dataset format_version " << kDatasetFormatVersion << "\n"
     << "samples format_version " << kSamplesFormatVersion << "\n"
     << "preferences format_version " << kPreferenceFormatVersion << "\n"
     << "checkpoint format_version " << kCheckpointFormatVersion;
  return ss.str();
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Multi-modal flow matching with preference fine-tuning on toy point sets", "molflow"};
  app.set_version_flag("--version", versionText());
  app.require_subcommand(1, 1);

  CommandOptions genOpts, trainOpts, sampleOpts, prefsOpts, dpoOpts, evalOpts;
  std::string    dataPath, checkpointPath, prefsPath, samplesPath, referencePath, baselinePath, metricsPath,
      histPath, initPath;

  CLI::App* gen = addCommand(app, "gen-data", "generate the toy conditional dataset", genOpts, "dataset file");
  addAlias(gen, genOpts, "--count", "data.count", "number of molecules");

  CLI::App* train = addCommand(app, "train", "train the base denoiser", trainOpts, "checkpoint file");
  train->add_option("--data", dataPath, "training dataset")->required()->check(CLI::ExistingFile);
  train->add_option("--metrics", metricsPath, "per-step JSONL metrics log");
  train->add_option("--init", initPath, "start from this checkpoint instead of a fresh init")
      ->check(CLI::ExistingFile);
  addAlias(train, trainOpts, "--steps", "train.steps", "optimizer steps");
  addAlias(train, trainOpts, "--lr", "train.lr", "initial learning rate");
  addAlias(train, trainOpts, "--batch", "train.batch", "molecules per step");

  CLI::App* sample = addCommand(app, "sample", "generate molecules from a checkpoint", sampleOpts, "samples file");
  sample->add_option("--checkpoint", checkpointPath, "model checkpoint")->required()->check(CLI::ExistingFile);
  sample->add_option("--data", dataPath, "dataset supplying pockets and the atom-count histogram")
      ->required()
      ->check(CLI::ExistingFile);
  addAlias(sample, sampleOpts, "--count", "sample.count", "number of molecules");
  addAlias(sample, sampleOpts, "--grid", "sample.grid", "time grid: two-phase, uniform:N or t0,t1,...");

  CLI::App* prefs = addCommand(app, "build-prefs", "sample per pocket and keep best/worst pairs", prefsOpts,
                               "preference file");
  prefs->add_option("--checkpoint", checkpointPath, "model checkpoint")->required()->check(CLI::ExistingFile);
  prefs->add_option("--data", dataPath, "dataset supplying pockets and atom counts")
      ->required()
      ->check(CLI::ExistingFile);
  addAlias(prefs, prefsOpts, "--samples-per-pocket", "prefs.samples_per_pocket", "samples drawn per pocket");
  addAlias(prefs, prefsOpts, "--pockets", "prefs.pockets", "number of pockets");

  CLI::App* dpo = addCommand(app, "dpo", "preference fine-tuning against a frozen reference", dpoOpts,
                             "checkpoint file");
  dpo->add_option("--checkpoint", checkpointPath, "base checkpoint (also the reference)")
      ->required()
      ->check(CLI::ExistingFile);
  dpo->add_option("--prefs", prefsPath, "preference file")->required()->check(CLI::ExistingFile);
  dpo->add_option("--metrics", metricsPath, "per-step JSONL metrics log");
  addAlias(dpo, dpoOpts, "--steps", "dpo.steps", "optimizer steps");
  addAlias(dpo, dpoOpts, "--lr", "dpo.lr", "initial learning rate");
  addAlias(dpo, dpoOpts, "--beta", "dpo.beta", "preference temperature");

  CLI::App* eval = addCommand(app, "eval", "distributional and reward metrics", evalOpts, "metrics report (JSON)");
  eval->add_option("--samples", samplesPath, "samples file")->required()->check(CLI::ExistingFile);
  eval->add_option("--reference", referencePath, "held-out dataset or samples file")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--baseline", baselinePath, "samples to compare rewards and diversity against")
      ->check(CLI::ExistingFile);
  eval->add_option("--hist-csv", histPath, "dump the generated all-atom distance histogram");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      cmdGenData(genOpts);
    } else if (*train) {
      cmdTrain(trainOpts, dataPath, metricsPath, initPath);
    } else if (*sample) {
      cmdSample(sampleOpts, checkpointPath, dataPath);
    } else if (*prefs) {
      cmdBuildPrefs(prefsOpts, checkpointPath, dataPath);
    } else if (*dpo) {
      cmdDpo(dpoOpts, checkpointPath, prefsPath, metricsPath);
    } else if (*eval) {
      cmdEval(evalOpts, samplesPath, referencePath, baselinePath, histPath);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace molflow::cli
