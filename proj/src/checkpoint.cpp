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

#include "pcnmf/checkpoint.hpp"

#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "pcnmf/csv_io.hpp"
#include "pcnmf/errors.hpp"

namespace pcnmf {

void to_json(nlohmann::json& j, const SolverConfig& c) {
  j = nlohmann::json{{"beta", c.beta},         {"epsilon", c.epsilon},
                     {"rank", c.rank},         {"max_iters", c.max_iters},
                     {"rel_tol", c.rel_tol},   {"init_seed", c.init_seed},
                     {"guard", c.guard}};
}

void from_json(const nlohmann::json& j, SolverConfig& c) {
  static const std::set<std::string> known = {
      "beta", "epsilon", "rank", "max_iters", "rel_tol", "init_seed", "guard"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ValueError("unknown solver key '" + key + "'");
  }
  SolverConfig d;
  c.beta = j.value("beta", d.beta);
  c.epsilon = j.value("epsilon", d.epsilon);
  c.rank = j.value("rank", d.rank);
  c.max_iters = j.value("max_iters", d.max_iters);
  c.rel_tol = j.value("rel_tol", d.rel_tol);
  c.init_seed = j.value("init_seed", d.init_seed);
  c.guard = j.value("guard", d.guard);
}

void write_checkpoint(const std::filesystem::path& dir, const Checkpoint& c) {
  std::filesystem::create_directories(dir);
  write_dense_csv(dir / "gains.csv", c.factors.gains());
  write_dense_csv(dir / "activations.csv", c.factors.activations());
  const nlohmann::json meta = {{"beta", c.beta},
                               {"epsilon", c.epsilon},
                               {"rank", c.rank},
                               {"iterations_run", c.iterations_run},
                               {"final_objective", c.final_objective}};
  std::ofstream out(dir / "checkpoint.json");
  if (!out) throw IoError("cannot write checkpoint.json in " + dir.string());
  out << meta.dump(2) << '\n';
}

Checkpoint read_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "checkpoint.json");
  if (!in) throw IoError("cannot read checkpoint.json in " + dir.string());
  const nlohmann::json meta = nlohmann::json::parse(in);
  Checkpoint c;
  c.factors = FactorPair(read_dense_csv(dir / "gains.csv"),
                         read_dense_csv(dir / "activations.csv"));
  c.beta = meta.at("beta").get<double>();
  c.epsilon = meta.at("epsilon").get<double>();
  c.rank = meta.at("rank").get<Index>();
  c.iterations_run = meta.at("iterations_run").get<std::size_t>();
  c.final_objective = meta.at("final_objective").get<double>();
  if (c.rank != c.factors.rank()) {
    throw IoError("checkpoint rank does not match factor files");
  }
  return c;
}

void write_trace_csv(std::ostream& out, const SolveTrace& trace) {
  out << "iter,fit,penalty,objective\n";
  for (const TraceRecord& r : trace.records) {
    out << r.iteration << ',' << format_double(r.fit) << ','
        << format_double(r.penalty) << ',' << format_double(r.objective) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const SolveTrace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_trace_csv(out, trace);
}

}  // namespace pcnmf
