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

// Monte Carlo experiment runner: two-phase estimation (learn gains on a
// leading window, then infer activations over every slot with the gains
// frozen), missing-entry RMSE, and sweeps over noise variance or
// observation probability. WNMF is the same pipeline with beta = 0.

#ifndef PCNMF_BENCH_HPP_
#define PCNMF_BENCH_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pcnmf/crsim.hpp"
#include "pcnmf/solver.hpp"
#include "pcnmf/specmat.hpp"

namespace pcnmf::bench {

enum class Method { kPcnmf, kWnmf };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct SweepAxis {
  std::string param;  // "noise_var" or "p_obs"
  std::vector<double> values;
};

struct SweepPoint {
  std::string param = "none";
  std::optional<double> value;
};

struct ExperimentConfig {
  crsim::ScenarioConfig scenario;
  SolverConfig solver;
  std::uint64_t master_seed = 0;
  std::size_t trials = 50;
  Index gamma_window = 300;
  std::vector<SweepAxis> sweep;
  std::vector<Method> methods{Method::kPcnmf, Method::kWnmf};
  // Scale each sensor's row to unit mean observed value before solving and
  // undo it on the gains afterwards. Row scaling preserves the rank-K
  // nonnegative model; without it beta depends on the power scale and the
  // fit is dominated by whichever sensor sits closest to a transmitter.
  bool normalize = true;
  std::size_t threads = 1;
  bool record_timing = true;
  bool keep_traces = false;

  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

struct TrialRecord {
  std::size_t trial_index = 0;
  std::uint64_t seed = 0;
  SweepPoint point;
  Method method = Method::kPcnmf;
  bool ok = false;
  std::string error;
  std::optional<double> rmse;         // per-sensor RMSE, averaged
  std::optional<double> rmse_pooled;  // RMSE over all missing cells
  double fit = 0.0;                   // final weighted fit, data units
  std::size_t gamma_iterations = 0;
  std::size_t infer_iterations = 0;
  double mean_transitions = 0.0;
  std::optional<double> seconds;
  std::optional<SolveTrace> gamma_trace;
};

struct SummaryRow {
  SweepPoint point;
  Method method = Method::kPcnmf;
  std::optional<double> mean_rmse;
  std::optional<double> stderr_rmse;
  std::size_t trials_ok = 0;
  std::size_t trials_failed = 0;
  std::optional<double> mean_seconds;
};

struct SweepResult {
  std::vector<TrialRecord> trials;
  std::vector<SummaryRow> summary;
};

// Root-mean-square error over the missing cells (mask == 0) of each sensor,
// averaged over sensors with at least one missing cell. Throws
// UndefinedMetricError when nothing is missing.
double rmse_missing(const Matrix& reconstructed, const Matrix& truth,
                    const Matrix& mask);
double rmse_missing_pooled(const Matrix& reconstructed, const Matrix& truth,
                           const Matrix& mask);

// Per row, number of slots t >= 1 with |p_jt - p_j(t-1)| > threshold.
std::vector<std::size_t> transition_count(const Matrix& activations,
                                          double threshold);

// Mean of a row's entries above 10% of its maximum (0 for an all-zero row).
double active_level(const Eigen::Ref<const Eigen::RowVectorXd>& row);

// transition_count with a per-row threshold of fraction * active_level(row).
std::vector<std::size_t> transition_count_relative(const Matrix& activations,
                                                   double fraction);

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial_index);

// Scenario config for one sweep point.
crsim::ScenarioConfig scenario_at(const ExperimentConfig& cfg,
                                  const SweepPoint& point);

struct MethodRun {
  Matrix gains;           // data units (normalization undone)
  Matrix activations;
  Matrix reconstruction;  // gains * activations
  Vector row_scale;       // factors applied to the data rows
  SolveTrace gamma_trace;
  SolveTrace infer_trace;
};

// The two-phase estimation for one method on an observed matrix.
MethodRun run_method(const MaskedMatrix& observed, const ExperimentConfig& cfg,
                     Method method, std::uint64_t init_seed);

// One record per configured method, all on the same scenario.
std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg,
                                   std::size_t trial_index,
                                   const SweepPoint& point = {});

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg);

SweepResult run_sweep(const ExperimentConfig& cfg);

// Aggregates in first-appearance order of (point, method); trials are summed
// in the order given.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& trials,
                                  bool with_timing);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& trials);
std::vector<TrialRecord> read_trials_csv(std::istream& in);

// summary.csv, trials.csv, optional trace_<point>_<trial>_<method>.csv.
void write_results(const std::filesystem::path& dir, const SweepResult& result);

}  // namespace pcnmf::bench

#endif  // PCNMF_BENCH_HPP_
