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

// Synthetic cognitive-radio scenarios: primary transmitters with Markov
// on/off activity, AR(1) Rayleigh-faded channels to a set of sensors, and a
// fusion-center measurement matrix with random misses and Gaussian noise.
//
//   s_r(t) = sum_j p_j(t) * gamma_rj(t) + z_r(t)
//   gamma_rj(t) = C * (d_rj / d0)^(-alpha) * |h_rj(t)|^2
//   h_rj(t) = eta * h_rj(t-1) + sqrt(1 - eta^2) * nu,  nu ~ CN(0, 1)

#ifndef PCNMF_CRSIM_HPP_
#define PCNMF_CRSIM_HPP_

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pcnmf/rng.hpp"
#include "pcnmf/specmat.hpp"

namespace pcnmf::crsim {

struct Range {
  double low = 0.0;
  double high = 0.0;
};

struct ScenarioConfig {
  double area_side = 100.0;
  Index n_pu = 3;
  Index n_su = 20;
  Index t_slots = 600;
  double d0 = 0.01;
  double alpha = 2.5;
  double eta = 0.9995;
  double duty = 0.3;
  Range a_range{0.05, 0.15};
  Range power_range{100.0, 200.0};
  double p_obs = 0.7;
  double noise_var = 1e-5;
  // Channel constant C; see effective_channel_constant().
  std::optional<double> channel_constant;
  std::uint64_t seed = 0;

  // C when set; otherwise d0^(-alpha), which makes the gain d^(-alpha) on
  // raw distances (unit gain at unit distance).
  double effective_channel_constant() const;
  void validate() const;
};

void to_json(nlohmann::json& j, const ScenarioConfig& c);
void from_json(const nlohmann::json& j, ScenarioConfig& c);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Positions {
  std::vector<Point> pu;
  std::vector<Point> su;
};

struct ScenarioTruth {
  Positions positions;
  std::vector<double> stop_prob;   // a_j
  std::vector<double> start_prob;  // b_j
  // gains_per_slot[t] is n_su x n_pu.
  std::vector<Matrix> gains_per_slot;
  Matrix p_true;    // n_pu x t_slots
  Matrix activity;  // n_pu x t_slots, 0/1
  Matrix s_clean;   // n_su x t_slots, noiseless
  MaskedMatrix observed;

  // Gains at the first slot of a window starting at `first_slot`.
  const Matrix& window_gains(Index first_slot = 0) const {
    return gains_per_slot.at(static_cast<std::size_t>(first_slot));
  }
};

Positions place_network(const ScenarioConfig& cfg, Rng& rng);

double distance(const Point& a, const Point& b);

// (d / d0)^(-alpha); distances below d0 are clamped to d0.
double path_gain(double d, const ScenarioConfig& cfg);

std::complex<double> draw_circular_gaussian(Rng& rng);

std::complex<double> fading_step(std::complex<double> h_prev, double eta,
                                 Rng& rng);

// b such that duty = b / (a + b).
double start_probability_for_duty(double duty, double stop_prob);

// Two-state chain: active -> idle with stop_prob, idle -> active with
// start_prob. The first slot is drawn from the stationary law unless
// `initial_active` is given; with both probabilities zero and no initial
// state the chain starts idle.
std::vector<bool> markov_activity(double stop_prob, double start_prob,
                                  Index t_slots, Rng& rng,
                                  std::optional<bool> initial_active = {});

// Deterministic in cfg (including cfg.seed).
ScenarioTruth generate_scenario(const ScenarioConfig& cfg);

// observed.csv, truth_s.csv, truth_p.csv, activity.csv, config.json.
void export_scenario(const std::filesystem::path& dir,
                     const ScenarioConfig& cfg, const ScenarioTruth& truth);

}  // namespace pcnmf::crsim

#endif  // PCNMF_CRSIM_HPP_
