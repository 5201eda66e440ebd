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

// pcnmf command-line tool.
//
//   pcnmf simulate  --config exp.json --seed 7 --out scen/
//   pcnmf solve     --input scen/observed.csv --out fit/ [--gains fit0/]
//   pcnmf benchmark --config exp.json --trials 50 --methods pcnmf,wnmf --out res/
//
// --config always takes an experiment JSON ({"scenario": {...},
// "solver": {...}, ...}); missing keys keep their defaults.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pcnmf/bench.hpp"
#include "pcnmf/checkpoint.hpp"
#include "pcnmf/crsim.hpp"
#include "pcnmf/csv_io.hpp"
#include "pcnmf/errors.hpp"
#include "pcnmf/solver.hpp"

namespace {

using pcnmf::bench::ExperimentConfig;

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw pcnmf::IoError("cannot read config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw pcnmf::IoError("config " + path + " is not valid JSON: " + e.what());
  }
  return j.get<ExperimentConfig>();
}

std::vector<pcnmf::bench::Method> parse_methods(const std::string& list) {
  std::vector<pcnmf::bench::Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(pcnmf::bench::parse_method(item));
  }
  return out;
}

// "noise_var=1e-5,1e-4" -> axis.
pcnmf::bench::SweepAxis parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw pcnmf::ValueError("--sweep expects param=v1,v2,...");
  }
  pcnmf::bench::SweepAxis axis{text.substr(0, eq), {}};
  for (const std::string& v : pcnmf::split_csv_line(text.substr(eq + 1))) {
    axis.values.push_back(pcnmf::parse_double(v));
  }
  return axis;
}

void print_warnings(const pcnmf::SolveTrace& trace) {
  for (const std::string& w : trace.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piecewise-constant NMF for spectrum sensing"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;

  auto* simulate = app.add_subcommand("simulate", "Generate and export one scenario");
  simulate->add_option("--config", config_path, "Experiment JSON");
  simulate->add_option("--seed", seed, "Scenario seed");
  simulate->add_option("--out", out_dir, "Output directory")->required();

  std::string input_path;
  std::string gains_dir;
  std::optional<double> beta;
  std::optional<pcnmf::Index> rank;
  std::optional<std::size_t> max_iters;
  bool normalize = false;
  auto* solve = app.add_subcommand("solve", "Factorize an observed.csv");
  solve->add_option("--input", input_path, "Masked CSV (r,t,value,observed)")->required();
  solve->add_option("--config", config_path, "Experiment JSON (solver section is used)");
  solve->add_option("--seed", seed, "Initialization seed");
  solve->add_option("--beta", beta, "Penalty weight");
  solve->add_option("--rank", rank, "Number of factors K");
  solve->add_option("--max-iters", max_iters, "Outer iteration cap");
  solve->add_option("--gains", gains_dir,
                    "Checkpoint directory; infer activations with its gains frozen");
  solve->add_flag("--normalize", normalize,
                  "Scale each row to unit mean observed value before solving");
  solve->add_option("--out", out_dir, "Output directory")->required();

  std::optional<std::size_t> trials;
  std::string methods;
  std::vector<std::string> sweeps;
  std::optional<std::size_t> threads;
  bool no_timing = false;
  bool traces = false;
  auto* benchmark = app.add_subcommand("benchmark", "Run Monte Carlo sweeps");
  benchmark->add_option("--config", config_path, "Experiment JSON");
  benchmark->add_option("--seed", seed, "Master seed");
  benchmark->add_option("--trials", trials, "Monte Carlo trials per sweep point");
  benchmark->add_option("--methods", methods, "Comma list from {pcnmf, wnmf}");
  benchmark->add_option("--sweep", sweeps, "param=v1,v2,... (noise_var or p_obs)");
  benchmark->add_option("--threads", threads, "Worker threads");
  benchmark->add_flag("--no-timing", no_timing,
                      "Write NA for wall times so summary.csv is reproducible");
  benchmark->add_flag("--traces", traces, "Write per-trial gains-phase traces");
  benchmark->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = load_config(config_path);

    if (*simulate) {
      if (seed) cfg.scenario.seed = *seed;
      const auto truth = pcnmf::crsim::generate_scenario(cfg.scenario);
      pcnmf::crsim::export_scenario(out_dir, cfg.scenario, truth);
      std::cout << "wrote scenario (" << cfg.scenario.n_su << " x "
                << cfg.scenario.t_slots << ", seed " << cfg.scenario.seed
                << ") to " << out_dir << '\n';
      return 0;
    }

    if (*solve) {
      pcnmf::SolverConfig scfg = cfg.solver;
      if (seed) scfg.init_seed = *seed;
      if (beta) scfg.beta = *beta;
      if (rank) scfg.rank = *rank;
      if (max_iters) scfg.max_iters = *max_iters;
      const pcnmf::MaskedMatrix raw = pcnmf::read_masked_csv(input_path);
      const pcnmf::Vector row_scale =
          normalize ? raw.row_normalizers() : pcnmf::Vector::Ones(raw.rows());
      const pcnmf::MaskedMatrix data = raw.row_scaled(row_scale);

      pcnmf::Matrix gains;
      pcnmf::Matrix activations;
      pcnmf::SolveTrace trace;
      if (gains_dir.empty()) {
        auto result = pcnmf::solve(data, scfg);
        gains = result.factors.gains();
        activations = result.factors.activations();
        trace = std::move(result.trace);
      } else {
        // Stored gains are in data units; move them to the solver's units.
        gains = row_scale.asDiagonal() * pcnmf::read_checkpoint(gains_dir).factors.gains();
        scfg.rank = gains.cols();
        auto result = pcnmf::infer_activations(data, gains, scfg);
        activations = std::move(result.activations);
        trace = std::move(result.trace);
      }
      print_warnings(trace);
      gains = row_scale.cwiseInverse().asDiagonal() * gains;

      pcnmf::Checkpoint cp;
      cp.factors = pcnmf::FactorPair(gains, activations);
      cp.beta = scfg.beta;
      cp.epsilon = scfg.epsilon;
      cp.rank = gains.cols();
      cp.iterations_run = trace.iterations();
      cp.final_objective = trace.final_objective();
      pcnmf::write_checkpoint(out_dir, cp);
      pcnmf::write_trace_csv(std::filesystem::path(out_dir) / "trace.csv", trace);
      pcnmf::write_dense_csv(std::filesystem::path(out_dir) / "reconstruction.csv",
                             gains * activations);
      std::cout << "iterations " << trace.iterations() << ", converged "
                << (trace.converged ? "yes" : "no") << ", fit "
                << pcnmf::format_double(pcnmf::weighted_fit(raw, gains, activations))
                << '\n';
      return 0;
    }

    if (*benchmark) {
      if (seed) cfg.master_seed = *seed;
      if (trials) cfg.trials = *trials;
      if (!methods.empty()) cfg.methods = parse_methods(methods);
      for (const std::string& s : sweeps) cfg.sweep.push_back(parse_sweep(s));
      if (threads) cfg.threads = *threads;
      if (no_timing) cfg.record_timing = false;
      if (traces) cfg.keep_traces = true;
      const auto result = pcnmf::bench::run_sweep(cfg);
      pcnmf::bench::write_results(out_dir, result);
      {
        std::ofstream echo(std::filesystem::path(out_dir) / "config.json");
        echo << nlohmann::json(cfg).dump(2) << '\n';
      }
      pcnmf::bench::write_summary_csv(std::cout, result.summary);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
