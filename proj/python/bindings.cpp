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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "molflow/cli.h"
#include "molflow/dataset.h"
#include "molflow/denoiser.h"
#include "molflow/eval.h"
#include "molflow/flows.h"
#include "molflow/io.h"
#include "molflow/losses.h"
#include "molflow/sampler.h"
#include "molflow/train.h"

namespace py = pybind11;
using namespace molflow;

namespace {

PocketContext makePocket(const std::vector<double>& feature, const Coords& anchors) {
  PocketContext pocket{anchors, feature};
  requireValid(validatePocket(pocket), "pocket");
  return pocket;
}

py::dict moleculeDict(const Molecule& m) {
  py::dict d;
  d["positions"] = m.positions;
  d["types"]     = m.types;
  return d;
}

py::list recordList(const std::vector<TrainingExample>& records) {
  py::list out;
  for (const auto& r : records) {
    py::dict d      = moleculeDict(r.molecule);
    d["feature"]    = r.pocket.feature;
    d["anchors"]    = r.pocket.anchors;
    out.append(d);
  }
  return out;
}

//! Thin owner of a parameter vector so Python sees one opaque model object.
struct Model {
  DenoiserParams params;

  static Model init(int hidden, int layers, int numTypes, int featureDim, int timeFrequencies, std::uint64_t seed) {
    ArchConfig arch;
    arch.hidden          = hidden;
    arch.layers          = layers;
    arch.numTypes        = numTypes;
    arch.featureDim      = featureDim;
    arch.timeFrequencies = timeFrequencies;
    validateArch(arch);
    Rng rng(seed);
    return Model{initParams(arch, rng)};
  }

  py::tuple forward(const Coords& x, const TypeVector& types, double t, const std::vector<double>& feature,
                    const Coords& anchors) const {
    const DenoiserOutput out =
        molflow::forward(params, makeDenoiserInput(x, types, TimePoint(t), makePocket(feature, anchors)));
    return py::make_tuple(out.x1Hat, out.logits);
  }

  py::dict generate(const std::vector<double>& feature, const Coords& anchors, int numAtoms, const std::string& grid,
                    std::uint64_t seed, bool argmaxFinal) const {
    const PocketContext pocket = makePocket(feature, anchors);
    const TimeGrid      timeGrid = TimeGrid::parse(grid);
    SamplerOptions      options;
    options.argmaxFinal = argmaxFinal;
    GenerationResult result;
    {
      py::gil_scoped_release release;
      Rng                    rng(seed);
      result = molflow::generate(params, pocket, numAtoms, timeGrid, rng, options);
    }
    py::dict d              = moleculeDict(result.molecule);
    d["evaluations"]        = result.denoiserEvaluations;
    return d;
  }
};

}  // namespace

PYBIND11_MODULE(_molflow, m) {
  m.doc()               = "Multi-modal flow matching and preference fine-tuning for small point-cloud molecules";
  m.attr("__version__") = MOLFLOW_VERSION;

  py::class_<TimeGrid>(m, "TimeGrid")
      .def(py::init<std::vector<double>>(), py::arg("points"))
      .def_static("two_phase", &TimeGrid::twoPhase)
      .def_static("uniform", &TimeGrid::uniform, py::arg("steps"))
      .def_static("parse", &TimeGrid::parse, py::arg("spec"))
      .def_property_readonly("points", &TimeGrid::points)
      .def_property_readonly("num_steps", &TimeGrid::numSteps)
      .def("__repr__", [](const TimeGrid& g) { return "TimeGrid('" + g.describe() + "')"; });

  // Flows.
  m.def("interpolate_positions",
        [](const Coords& x0, const Coords& x1, double t) { return interpolatePositions(x0, x1, TimePoint(t)); },
        py::arg("x0"), py::arg("x1"), py::arg("t"));
  m.def("corruption_dist",
        [](int v1, double t, int k) { return corruptionDist(v1, TimePoint(t), k).probs(); }, py::arg("v1"),
        py::arg("t"), py::arg("k"));
  m.def("marginal_type_dist",
        [](const std::vector<double>& p, double t) {
          return marginalTypeDist(TypeDistribution(p), TimePoint(t)).probs();
        },
        py::arg("p_data"), py::arg("t"));
  m.def("posterior",
        [](const std::vector<double>& p, int vt, double t) {
          return posteriorV1GivenVt(TypeDistribution(p), vt, TimePoint(t)).probs();
        },
        py::arg("p_data"), py::arg("vt"), py::arg("t"));
  m.def("corrupt_types",
        [](const TypeVector& v1, double t, int k, std::uint64_t seed) {
          Rng rng(seed);
          return corruptTypes(v1, TimePoint(t), k, rng);
        },
        py::arg("v1"), py::arg("t"), py::arg("k"), py::arg("seed"));
  m.def("sample_train_times",
        [](int count, std::uint64_t seed) {
          Rng                 rng(seed);
          std::vector<double> out(static_cast<size_t>(count));
          for (auto& t : out) {
            t = sampleTrainTime(rng).value();
          }
          return out;
        },
        py::arg("count"), py::arg("seed"));

  // Losses.
  m.def("pos_loss", &posLoss, py::arg("x1_hat"), py::arg("x1"));
  m.def("type_loss", &typeLoss, py::arg("logits"), py::arg("v1"));
  m.def("chamfer", &chamfer, py::arg("a"), py::arg("b"));
  m.def("dpo_distance_term",
        [](double wTheta, double wRef, double lTheta, double lRef, double beta) {
          return dpoDistanceTerm(wTheta, wRef, lTheta, lRef, beta).loss;
        },
        py::arg("winner_theta"), py::arg("winner_ref"), py::arg("loser_theta"), py::arg("loser_ref"), py::arg("beta"));
  m.def("dpo_type_term",
        [](double wTheta, double wRef, double lTheta, double lRef, double t, double beta) {
          return dpoTypeTerm(wTheta, wRef, lTheta, lRef, TimePoint(t), beta).loss;
        },
        py::arg("winner_log_theta"), py::arg("winner_log_ref"), py::arg("loser_log_theta"), py::arg("loser_log_ref"),
        py::arg("t"), py::arg("beta"));

  // Model, sampling, reward and metrics.
  py::class_<Model>(m, "Model")
      .def_static("init", &Model::init, py::arg("hidden") = 64, py::arg("layers") = 4,
                  py::arg("num_types") = kDefaultNumTypes, py::arg("feature_dim") = kNumTemplates,
                  py::arg("time_frequencies") = 8, py::arg("seed") = 0)
      .def_static("load", [](const std::string& path) { return Model{loadCheckpoint(path)}; }, py::arg("path"))
      .def("save", [](const Model& self, const std::string& path) { saveCheckpoint(path, self.params); },
           py::arg("path"))
      .def_property_readonly("num_params", [](const Model& self) { return self.params.values.size(); })
      .def_property_readonly("checkpoint_id", [](const Model& self) { return checkpointId(self.params); })
      .def("forward", &Model::forward, py::arg("x"), py::arg("types"), py::arg("t"), py::arg("feature"),
           py::arg("anchors"))
      .def("generate", &Model::generate, py::arg("feature"), py::arg("anchors"), py::arg("num_atoms"),
           py::arg("grid") = "two-phase", py::arg("seed") = 0, py::arg("argmax_final") = false);

  m.def("synthetic_reward",
        [](const Coords& positions, const TypeVector& types, const Coords& anchors, double rMin) {
          Molecule mol;
          mol.positions = positions;
          mol.types     = types;
          RewardConfig config;
          config.rMin = rMin;
          return syntheticReward(mol, PocketContext{anchors, {}}, config);
        },
        py::arg("positions"), py::arg("types"), py::arg("anchors"), py::arg("r_min") = 1.2);
  m.def("jsd", py::overload_cast<const std::vector<double>&, const std::vector<double>&>(&jsd), py::arg("p"),
        py::arg("q"));

  m.def("generate_dataset",
        [](int count, std::uint64_t seed, int numPockets) {
          ToyDatasetConfig config;
          config.count      = count;
          config.numPockets = numPockets;
          Rng rng(seed);
          return recordList(generateToyDataset(config, rng).records);
        },
        py::arg("count"), py::arg("seed") = 0, py::arg("num_pockets") = 100);
  m.def("load_dataset", [](const std::string& path) { return recordList(loadDataset(path).records); },
        py::arg("path"));
  m.def("load_metrics", [](const std::string& path) { return parseMetrics(readFile(path)); }, py::arg("path"));

  m.def("run_cli",
        [](std::vector<std::string> args) {
          args.insert(args.begin(), "molflow");
          std::vector<char*> argv;
          for (auto& a : args) {
            argv.push_back(a.data());
          }
          py::gil_scoped_release release;
          return cli::run(static_cast<int>(argv.size()), argv.data());
        },
        py::arg("args"), "Runs a molflow subcommand in-process and returns its exit code.");
}
