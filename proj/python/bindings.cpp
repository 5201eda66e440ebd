// Copyright 2026 The pcnmf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings. Configs cross the boundary as JSON text so the Python
// side can pass plain dicts; matrices go through the Eigen type casters.

#include <string>

#include <nlohmann/json.hpp>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pcnmf/bench.hpp"
#include "pcnmf/checkpoint.hpp"
#include "pcnmf/crsim.hpp"
#include "pcnmf/errors.hpp"
#include "pcnmf/solver.hpp"

namespace py = pybind11;
using namespace pcnmf;

namespace {

template <typename T>
T from_text(const std::string& text) {
  if (text.empty()) return T{};
  return nlohmann::json::parse(text).get<T>();
}

MaskedMatrix masked(const Matrix& values, const std::optional<Matrix>& mask) {
  return mask ? MaskedMatrix(values, *mask) : MaskedMatrix::fully_observed(values);
}

py::dict trace_dict(const SolveTrace& t) {
  std::vector<double> fit, penalty, objective;
  for (const TraceRecord& r : t.records) {
    fit.push_back(r.fit);
    penalty.push_back(r.penalty);
    objective.push_back(r.objective);
  }
  py::dict d;
  d["initial_objective"] = t.initial_objective;
  d["fit"] = fit;
  d["penalty"] = penalty;
  d["objective"] = objective;
  d["converged"] = t.converged;
  d["warnings"] = t.warnings;
  return d;
}

py::object optional_value(const std::optional<double>& v) {
  return v ? py::object(py::float_(*v)) : py::object(py::none());
}

}  // namespace

PYBIND11_MODULE(_pcnmf, m) {
  m.doc() = "Piecewise-constant weighted NMF core";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<ValueError>(m, "ConfigError", base.ptr());
  py::register_exception<DegenerateFactorError>(m, "DegenerateFactorError", base.ptr());
  py::register_exception<NumericFailure>(m, "NumericFailure", base.ptr());
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  m.def("default_solver_config",
        [] { return nlohmann::json(SolverConfig{}).dump(); });
  m.def("default_experiment_config",
        [] { return nlohmann::json(bench::ExperimentConfig{}).dump(); });

  m.def("solve",
        [](const Matrix& values, const std::optional<Matrix>& mask,
           const std::string& config) {
          const SolverConfig cfg = from_text<SolverConfig>(config);
          SolveResult r;
          {
            py::gil_scoped_release release;
            r = solve(masked(values, mask), cfg);
          }
          py::dict d;
          d["gains"] = r.factors.gains();
          d["activations"] = r.factors.activations();
          d["trace"] = trace_dict(r.trace);
          return d;
        },
        py::arg("values"), py::arg("mask") = py::none(), py::arg("config") = "");

  m.def("infer_activations",
        [](const Matrix& values, const std::optional<Matrix>& mask, const Matrix& gains,
           const std::string& config) {
          const SolverConfig cfg = from_text<SolverConfig>(config);
          InferResult r;
          {
            py::gil_scoped_release release;
            r = infer_activations(masked(values, mask), gains, cfg);
          }
          py::dict d;
          d["activations"] = r.activations;
          d["trace"] = trace_dict(r.trace);
          return d;
        },
        py::arg("values"), py::arg("mask"), py::arg("gains"), py::arg("config") = "");

  m.def("weighted_fit",
        [](const Matrix& values, const std::optional<Matrix>& mask, const Matrix& gains,
           const Matrix& activations) {
          return weighted_fit(masked(values, mask), gains, activations);
        },
        py::arg("values"), py::arg("mask"), py::arg("gains"), py::arg("activations"));
  m.def("penalty_smoothed", &penalty_smoothed, py::arg("activations"), py::arg("epsilon"));

  m.def("generate_scenario",
        [](const std::string& config) {
          const auto cfg = from_text<crsim::ScenarioConfig>(config);
          const auto t = crsim::generate_scenario(cfg);
          py::dict d;
          d["observed"] = t.observed.values();
          d["mask"] = t.observed.mask();
          d["s_clean"] = t.s_clean;
          d["p_true"] = t.p_true;
          d["activity"] = t.activity;
          d["gains_first_slot"] = t.window_gains(0);
          return d;
        },
        py::arg("config") = "");

  m.def("rmse_missing", &bench::rmse_missing, py::arg("reconstructed"), py::arg("truth"),
        py::arg("mask"));
  m.def("transition_count", &bench::transition_count, py::arg("activations"),
        py::arg("threshold"));

  m.def("run_sweep",
        [](const std::string& config) {
          const auto cfg = from_text<bench::ExperimentConfig>(config);
          bench::SweepResult r;
          {
            py::gil_scoped_release release;
            r = bench::run_sweep(cfg);
          }
          py::list rows;
          for (const auto& s : r.summary) {
            py::dict d;
            d["sweep_param"] = s.point.param;
            d["sweep_value"] = optional_value(s.point.value);
            d["method"] = bench::to_string(s.method);
            d["mean_rmse"] = optional_value(s.mean_rmse);
            d["stderr_rmse"] = optional_value(s.stderr_rmse);
            d["trials_ok"] = s.trials_ok;
            d["trials_failed"] = s.trials_failed;
            d["mean_seconds"] = optional_value(s.mean_seconds);
            rows.append(d);
          }
          py::list trials;
          for (const auto& t : r.trials) {
            py::dict d;
            d["trial_index"] = t.trial_index;
            d["seed"] = t.seed;
            d["method"] = bench::to_string(t.method);
            d["ok"] = t.ok;
            d["rmse"] = optional_value(t.rmse);
            d["mean_transitions"] = t.mean_transitions;
            trials.append(d);
          }
          py::dict out;
          out["summary"] = rows;
          out["trials"] = trials;
          return out;
        },
        py::arg("config") = "");
}
