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

#include "pcnmf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "pcnmf/checkpoint.hpp"
#include "pcnmf/csv_io.hpp"
#include "pcnmf/errors.hpp"
#include "pcnmf/rng.hpp"

namespace pcnmf::bench {

namespace {

constexpr std::uint64_t kInitTag = 0x1217;

std::string opt_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("NA");
}

std::optional<double> parse_opt(const std::string& field) {
  if (field == "NA") return std::nullopt;
  return parse_double(field);
}

std::size_t parse_size(const std::string& field) {
  return static_cast<std::size_t>(std::stoull(field));
}

bool same_point(const SweepPoint& a, const SweepPoint& b) {
  return a.param == b.param && a.value == b.value;
}

}  // namespace

std::string to_string(Method m) {
  return m == Method::kPcnmf ? "pcnmf" : "wnmf";
}

Method parse_method(const std::string& name) {
  if (name == "pcnmf") return Method::kPcnmf;
  if (name == "wnmf") return Method::kWnmf;
  throw ValueError("unknown method '" + name + "' (expected pcnmf or wnmf)");
}

void ExperimentConfig::validate() const {
  scenario.validate();
  solver.validate();
  if (trials < 1) throw ValueError("trials must be >= 1");
  if (gamma_window < 1 || gamma_window > scenario.t_slots) {
    throw ValueError("gamma_window must lie in [1, t_slots]");
  }
  if (methods.empty()) throw ValueError("at least one method is required");
  if (threads < 1) throw ValueError("threads must be >= 1");
  for (const SweepAxis& axis : sweep) {
    if (axis.param != "noise_var" && axis.param != "p_obs") {
      throw ValueError("sweep parameter must be noise_var or p_obs, got '" +
                       axis.param + "'");
    }
    if (axis.values.empty()) throw ValueError("sweep axis without values");
    for (double v : axis.values) {
      crsim::ScenarioConfig probe = scenario;
      (axis.param == "noise_var" ? probe.noise_var : probe.p_obs) = v;
      probe.validate();
    }
  }
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  nlohmann::json sweep = nlohmann::json::array();
  for (const SweepAxis& a : c.sweep) {
    sweep.push_back({{"param", a.param}, {"values", a.values}});
  }
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.push_back(to_string(m));
  j = nlohmann::json{{"scenario", c.scenario},
                     {"solver", c.solver},
                     {"master_seed", c.master_seed},
                     {"trials", c.trials},
                     {"gamma_window", c.gamma_window},
                     {"sweep", sweep},
                     {"methods", methods},
                     {"normalize", c.normalize},
                     {"threads", c.threads},
                     {"record_timing", c.record_timing},
                     {"keep_traces", c.keep_traces}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  static const std::set<std::string> known = {
      "scenario", "solver",  "master_seed",   "trials",     "gamma_window",
      "sweep",    "methods", "normalize",     "threads",    "record_timing",
      "keep_traces"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ValueError("unknown experiment key '" + key + "'");
  }
  ExperimentConfig d;
  c.scenario = j.contains("scenario") ? j.at("scenario").get<crsim::ScenarioConfig>()
                                      : d.scenario;
  c.solver = j.contains("solver") ? j.at("solver").get<SolverConfig>() : d.solver;
  c.master_seed = j.value("master_seed", d.master_seed);
  c.trials = j.value("trials", d.trials);
  c.gamma_window = j.value("gamma_window", d.gamma_window);
  c.sweep.clear();
  if (j.contains("sweep")) {
    for (const auto& a : j.at("sweep")) {
      c.sweep.push_back({a.at("param").get<std::string>(),
                         a.at("values").get<std::vector<double>>()});
    }
  }
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
  } else {
    c.methods = d.methods;
  }
  c.normalize = j.value("normalize", d.normalize);
  c.threads = j.value("threads", d.threads);
  c.record_timing = j.value("record_timing", d.record_timing);
  c.keep_traces = j.value("keep_traces", d.keep_traces);
}

double rmse_missing(const Matrix& reconstructed, const Matrix& truth,
                    const Matrix& mask) {
  if (reconstructed.rows() != truth.rows() || reconstructed.cols() != truth.cols() ||
      mask.rows() != truth.rows() || mask.cols() != truth.cols()) {
    throw ShapeError("rmse_missing operands differ in shape");
  }
  double total = 0.0;
  std::size_t sensors = 0;
  for (Index r = 0; r < truth.rows(); ++r) {
    double sq = 0.0;
    std::size_t n = 0;
    for (Index t = 0; t < truth.cols(); ++t) {
      if (mask(r, t) != 0.0) continue;
      const double e = reconstructed(r, t) - truth(r, t);
      sq += e * e;
      ++n;
    }
    if (n == 0) continue;
    total += std::sqrt(sq / static_cast<double>(n));
    ++sensors;
  }
  if (sensors == 0) throw UndefinedMetricError("no missing entries to score");
  return total / static_cast<double>(sensors);
}

double rmse_missing_pooled(const Matrix& reconstructed, const Matrix& truth,
                           const Matrix& mask) {
  if (reconstructed.rows() != truth.rows() || reconstructed.cols() != truth.cols() ||
      mask.rows() != truth.rows() || mask.cols() != truth.cols()) {
    throw ShapeError("rmse_missing_pooled operands differ in shape");
  }
  double sq = 0.0;
  std::size_t n = 0;
  for (Index t = 0; t < truth.cols(); ++t) {
    for (Index r = 0; r < truth.rows(); ++r) {
      if (mask(r, t) != 0.0) continue;
      const double e = reconstructed(r, t) - truth(r, t);
      sq += e * e;
      ++n;
    }
  }
  if (n == 0) throw UndefinedMetricError("no missing entries to score");
  return std::sqrt(sq / static_cast<double>(n));
}

std::vector<std::size_t> transition_count(const Matrix& activations,
                                          double threshold) {
  if (!(threshold > 0.0)) throw ValueError("threshold must be > 0");
  std::vector<std::size_t> counts(static_cast<std::size_t>(activations.rows()), 0);
  for (Index j = 0; j < activations.rows(); ++j) {
    for (Index t = 1; t < activations.cols(); ++t) {
      if (std::abs(activations(j, t) - activations(j, t - 1)) > threshold) {
        ++counts[static_cast<std::size_t>(j)];
      }
    }
  }
  return counts;
}

double active_level(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  if (row.size() == 0) return 0.0;
  const double cut = 0.1 * row.maxCoeff();
  double sum = 0.0;
  std::size_t n = 0;
  for (Index t = 0; t < row.size(); ++t) {
    if (row(t) > cut) {
      sum += row(t);
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::vector<std::size_t> transition_count_relative(const Matrix& activations,
                                                   double fraction) {
  std::vector<std::size_t> counts;
  for (Index j = 0; j < activations.rows(); ++j) {
    const double level = active_level(activations.row(j));
    if (level <= 0.0) {
      counts.push_back(0);
      continue;
    }
    const Matrix row = activations.row(j);
    counts.push_back(transition_count(row, fraction * level).front());
  }
  return counts;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial_index) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(trial_index)});
}

crsim::ScenarioConfig scenario_at(const ExperimentConfig& cfg,
                                  const SweepPoint& point) {
  crsim::ScenarioConfig s = cfg.scenario;
  if (point.value) {
    if (point.param == "noise_var") {
      s.noise_var = *point.value;
    } else if (point.param == "p_obs") {
      s.p_obs = *point.value;
    } else {
      throw ValueError("unknown sweep parameter '" + point.param + "'");
    }
  }
  return s;
}

MethodRun run_method(const MaskedMatrix& observed, const ExperimentConfig& cfg,
                     Method method, std::uint64_t init_seed) {
  SolverConfig scfg = cfg.solver;
  scfg.init_seed = init_seed;
  if (method == Method::kWnmf) scfg.beta = 0.0;

  MethodRun run;
  run.row_scale = cfg.normalize ? observed.row_normalizers()
                                : Vector::Ones(observed.rows());
  const MaskedMatrix data = observed.row_scaled(run.row_scale);

  SolveResult learned = solve(data.slots(0, cfg.gamma_window), scfg);
  const Matrix scaled_gains = learned.factors.gains();
  run.gamma_trace = std::move(learned.trace);

  InferResult inferred = infer_activations(data, scaled_gains, scfg);
  run.activations = std::move(inferred.activations);
  run.infer_trace = std::move(inferred.trace);
  run.gains = run.row_scale.cwiseInverse().asDiagonal() * scaled_gains;
  run.reconstruction = run.gains * run.activations;
  return run;
}

std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg,
                                   std::size_t trial_index,
                                   const SweepPoint& point) {
  crsim::ScenarioConfig scfg = scenario_at(cfg, point);
  const std::uint64_t seed = trial_seed(cfg.master_seed, trial_index);
  scfg.seed = seed;
  const crsim::ScenarioTruth truth = crsim::generate_scenario(scfg);
  const std::uint64_t init_seed = derive_seed(seed, {kInitTag});

  std::vector<TrialRecord> records;
  for (Method method : cfg.methods) {
    TrialRecord rec;
    rec.trial_index = trial_index;
    rec.seed = seed;
    rec.point = point;
    rec.method = method;
    const auto start = std::chrono::steady_clock::now();
    try {
      MethodRun run = run_method(truth.observed, cfg, method, init_seed);
      const auto stop = std::chrono::steady_clock::now();
      if (cfg.record_timing) {
        rec.seconds = std::chrono::duration<double>(stop - start).count();
      }
      rec.ok = true;
      const Matrix& mask = truth.observed.mask();
      try {
        rec.rmse = rmse_missing(run.reconstruction, truth.s_clean, mask);
        rec.rmse_pooled = rmse_missing_pooled(run.reconstruction, truth.s_clean, mask);
      } catch (const UndefinedMetricError&) {
        rec.rmse.reset();
        rec.rmse_pooled.reset();
      }
      rec.fit = weighted_fit(truth.observed, run.gains, run.activations);
      rec.gamma_iterations = run.gamma_trace.iterations();
      rec.infer_iterations = run.infer_trace.iterations();
      const auto counts = transition_count_relative(run.activations, 0.1);
      double sum = 0.0;
      for (std::size_t c : counts) sum += static_cast<double>(c);
      rec.mean_transitions = counts.empty() ? 0.0 : sum / static_cast<double>(counts.size());
      if (cfg.keep_traces) rec.gamma_trace = std::move(run.gamma_trace);
    } catch (const NumericFailure& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
  std::vector<SweepPoint> points;
  for (const SweepAxis& axis : cfg.sweep) {
    for (double v : axis.values) points.push_back({axis.param, v});
  }
  if (points.empty()) points.push_back({});
  return points;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<SweepPoint> points = sweep_points(cfg);
  const std::size_t tasks = points.size() * cfg.trials;
  std::vector<std::vector<TrialRecord>> slots(tasks);
  std::vector<std::exception_ptr> errors(tasks);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks; i = next++) {
      try {
        slots[i] = run_trial(cfg, i % cfg.trials, points[i / cfg.trials]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(cfg.threads, tasks);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SweepResult result;
  for (auto& records : slots) {
    for (auto& r : records) result.trials.push_back(std::move(r));
  }
  result.summary = summarize(result.trials, cfg.record_timing);
  return result;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& trials,
                                  bool with_timing) {
  struct Acc {
    SummaryRow row;
    std::vector<double> rmse;
    double seconds = 0.0;
    std::size_t timed = 0;
  };
  std::vector<Acc> groups;
  for (const TrialRecord& t : trials) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Acc& a) {
      return same_point(a.row.point, t.point) && a.row.method == t.method;
    });
    if (it == groups.end()) {
      groups.push_back({});
      it = std::prev(groups.end());
      it->row.point = t.point;
      it->row.method = t.method;
    }
    if (!t.ok) {
      ++it->row.trials_failed;
      continue;
    }
    ++it->row.trials_ok;
    if (t.rmse) it->rmse.push_back(*t.rmse);
    if (t.seconds) {
      it->seconds += *t.seconds;
      ++it->timed;
    }
  }
  std::vector<SummaryRow> rows;
  for (Acc& a : groups) {
    const std::size_t n = a.rmse.size();
    if (n > 0) {
      double sum = 0.0;
      for (double v : a.rmse) sum += v;
      const double mean = sum / static_cast<double>(n);
      a.row.mean_rmse = mean;
      if (n > 1) {
        double ss = 0.0;
        for (double v : a.rmse) ss += (v - mean) * (v - mean);
        a.row.stderr_rmse =
            std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
      }
    }
    if (with_timing && a.timed > 0) {
      a.row.mean_seconds = a.seconds / static_cast<double>(a.timed);
    }
    rows.push_back(a.row);
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "sweep_param,sweep_value,method,mean_rmse,stderr_rmse,trials_ok,"
         "trials_failed,mean_seconds\n";
  for (const SummaryRow& r : rows) {
    out << r.point.param << ',' << opt_field(r.point.value) << ','
        << to_string(r.method) << ',' << opt_field(r.mean_rmse) << ','
        << opt_field(r.stderr_rmse) << ',' << r.trials_ok << ','
        << r.trials_failed << ',' << opt_field(r.mean_seconds) << '\n';
  }
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& trials) {
  out << "trial_index,seed,sweep_param,sweep_value,method,status,rmse,"
         "rmse_pooled,fit,gamma_iterations,infer_iterations,mean_transitions,"
         "seconds,error\n";
  for (const TrialRecord& t : trials) {
    std::string error = t.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << t.trial_index << ',' << t.seed << ',' << t.point.param << ','
        << opt_field(t.point.value) << ',' << to_string(t.method) << ','
        << (t.ok ? "ok" : "failed") << ',' << opt_field(t.rmse) << ','
        << opt_field(t.rmse_pooled) << ',' << format_double(t.fit) << ','
        << t.gamma_iterations << ',' << t.infer_iterations << ','
        << format_double(t.mean_transitions) << ',' << opt_field(t.seconds)
        << ',' << error << '\n';
  }
}

std::vector<TrialRecord> read_trials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("trial_index,", 0) != 0) {
    throw IoError("trials CSV header missing");
  }
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 14) throw IoError("trials CSV row needs 14 fields: " + line);
    TrialRecord t;
    t.trial_index = parse_size(f[0]);
    t.seed = std::stoull(f[1]);
    t.point.param = f[2];
    t.point.value = parse_opt(f[3]);
    t.method = parse_method(f[4]);
    t.ok = f[5] == "ok";
    t.rmse = parse_opt(f[6]);
    t.rmse_pooled = parse_opt(f[7]);
    t.fit = parse_double(f[8]);
    t.gamma_iterations = parse_size(f[9]);
    t.infer_iterations = parse_size(f[10]);
    t.mean_transitions = parse_double(f[11]);
    t.seconds = parse_opt(f[12]);
    t.error = f[13];
    out.push_back(std::move(t));
  }
  return out;
}

void write_results(const std::filesystem::path& dir, const SweepResult& result) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "summary.csv");
    if (!out) throw IoError("cannot write summary.csv in " + dir.string());
    write_summary_csv(out, result.summary);
  }
  {
    std::ofstream out(dir / "trials.csv");
    if (!out) throw IoError("cannot write trials.csv in " + dir.string());
    write_trials_csv(out, result.trials);
  }
  // Point index: position of the record's sweep point in first-seen order.
  std::vector<SweepPoint> seen;
  for (const TrialRecord& t : result.trials) {
    auto it = std::find_if(seen.begin(), seen.end(),
                           [&](const SweepPoint& p) { return same_point(p, t.point); });
    if (it == seen.end()) {
      seen.push_back(t.point);
      it = std::prev(seen.end());
    }
    if (!t.gamma_trace) continue;
    const auto point_index = static_cast<std::size_t>(it - seen.begin());
    write_trace_csv(dir / ("trace_" + std::to_string(point_index) + "_" +
                           std::to_string(t.trial_index) + "_" +
                           to_string(t.method) + ".csv"),
                    *t.gamma_trace);
  }
}

}  // namespace pcnmf::bench
