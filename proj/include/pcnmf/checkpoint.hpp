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

// Factor checkpoints (gains.csv, activations.csv, checkpoint.json) and solver
// trace export. Also the JSON mapping of SolverConfig.

#ifndef PCNMF_CHECKPOINT_HPP_
#define PCNMF_CHECKPOINT_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>

#include <nlohmann/json_fwd.hpp>

#include "pcnmf/solver.hpp"
#include "pcnmf/specmat.hpp"

namespace pcnmf {

void to_json(nlohmann::json& j, const SolverConfig& c);
void from_json(const nlohmann::json& j, SolverConfig& c);

struct Checkpoint {
  FactorPair factors;
  double beta = 0.0;
  double epsilon = 0.0;
  Index rank = 0;
  std::size_t iterations_run = 0;
  double final_objective = 0.0;
};

void write_checkpoint(const std::filesystem::path& dir, const Checkpoint& c);
Checkpoint read_checkpoint(const std::filesystem::path& dir);

// Columns iter,fit,penalty,objective.
void write_trace_csv(std::ostream& out, const SolveTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const SolveTrace& trace);

}  // namespace pcnmf

#endif  // PCNMF_CHECKPOINT_HPP_
