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

#include "pcnmf/crsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "pcnmf/csv_io.hpp"
#include "pcnmf/errors.hpp"

namespace pcnmf::crsim {

namespace {

// Substream tags; never reorder, they are part of the reproducibility
// contract for a given seed.
enum Stream : std::uint64_t {
  kPositions = 1,
  kActivity = 2,
  kPower = 3,
  kFading = 4,
  kNoise = 5,
  kMask = 6,
};

double draw_uniform(Rng& rng, Range r) {
  if (r.low == r.high) return r.low;
  return std::uniform_real_distribution<double>(r.low, r.high)(rng);
}

void require(bool ok, const char* what) {
  if (!ok) throw ValueError(std::string("invalid scenario config: ") + what);
}

}  // namespace

double ScenarioConfig::effective_channel_constant() const {
  return channel_constant.value_or(std::pow(d0, -alpha));
}

void ScenarioConfig::validate() const {
  require(area_side >= 0.0, "area_side >= 0");
  require(n_pu >= 1 && n_su >= 1 && t_slots >= 1, "counts >= 1");
  require(d0 > 0.0, "d0 > 0");
  require(alpha > 0.0, "alpha > 0");
  require(eta >= 0.0 && eta <= 1.0, "0 <= eta <= 1");
  require(duty > 0.0 && duty < 1.0, "0 < duty < 1");
  require(a_range.low >= 0.0 && a_range.low <= a_range.high && a_range.high <= 1.0,
          "a_range within [0, 1]");
  require(power_range.low >= 0.0 && power_range.low <= power_range.high,
          "power_range ordered and nonnegative");
  require(p_obs >= 0.0 && p_obs <= 1.0, "0 <= p_obs <= 1");
  require(noise_var >= 0.0, "noise_var >= 0");
  require(!channel_constant || *channel_constant > 0.0, "channel_constant > 0");
  // b = duty * a / (1 - duty) must remain a probability.
  require(start_probability_for_duty(duty, a_range.high) <= 1.0,
          "duty * a / (1 - duty) <= 1");
}

void to_json(nlohmann::json& j, const ScenarioConfig& c) {
  j = nlohmann::json{
      {"area_side", c.area_side},
      {"n_pu", c.n_pu},
      {"n_su", c.n_su},
      {"t_slots", c.t_slots},
      {"d0", c.d0},
      {"alpha", c.alpha},
      {"eta", c.eta},
      {"duty", c.duty},
      {"a_range", {c.a_range.low, c.a_range.high}},
      {"power_range", {c.power_range.low, c.power_range.high}},
      {"p_obs", c.p_obs},
      {"noise_var", c.noise_var},
      {"channel_constant", c.channel_constant
                               ? nlohmann::json(*c.channel_constant)
                               : nlohmann::json(nullptr)},
      {"seed", c.seed},
  };
}

void from_json(const nlohmann::json& j, ScenarioConfig& c) {
  static const std::set<std::string> known = {
      "area_side", "n_pu",  "n_su",      "t_slots",     "d0",
      "alpha",     "eta",   "duty",      "a_range",     "power_range",
      "p_obs",     "noise_var", "channel_constant", "seed",
      // Written by export_scenario for reference; ignored on input.
      "effective_channel_constant"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ValueError("unknown scenario key '" + key + "'");
  }
  ScenarioConfig d;
  c.area_side = j.value("area_side", d.area_side);
  c.n_pu = j.value("n_pu", d.n_pu);
  c.n_su = j.value("n_su", d.n_su);
  c.t_slots = j.value("t_slots", d.t_slots);
  c.d0 = j.value("d0", d.d0);
  c.alpha = j.value("alpha", d.alpha);
  c.eta = j.value("eta", d.eta);
  c.duty = j.value("duty", d.duty);
  if (j.contains("a_range")) {
    c.a_range = {j.at("a_range").at(0).get<double>(), j.at("a_range").at(1).get<double>()};
  }
  if (j.contains("power_range")) {
    c.power_range = {j.at("power_range").at(0).get<double>(),
                     j.at("power_range").at(1).get<double>()};
  }
  c.p_obs = j.value("p_obs", d.p_obs);
  c.noise_var = j.value("noise_var", d.noise_var);
  if (j.contains("channel_constant") && !j.at("channel_constant").is_null()) {
    c.channel_constant = j.at("channel_constant").get<double>();
  } else {
    c.channel_constant.reset();
  }
  c.seed = j.value("seed", d.seed);
}

Positions place_network(const ScenarioConfig& cfg, Rng& rng) {
  const Range side{0.0, cfg.area_side};
  Positions out;
  out.pu.resize(static_cast<std::size_t>(cfg.n_pu));
  out.su.resize(static_cast<std::size_t>(cfg.n_su));
  for (auto* group : {&out.pu, &out.su}) {
    for (Point& p : *group) {
      p.x = draw_uniform(rng, side);
      p.y = draw_uniform(rng, side);
    }
  }
  return out;
}

double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double path_gain(double d, const ScenarioConfig& cfg) {
  const double clamped = std::max(d, cfg.d0);
  return std::pow(clamped / cfg.d0, -cfg.alpha);
}

std::complex<double> draw_circular_gaussian(Rng& rng) {
  // Unit total variance: each quadrature has variance 1/2.
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

std::complex<double> fading_step(std::complex<double> h_prev, double eta,
                                 Rng& rng) {
  if (eta < 0.0 || eta > 1.0) throw ValueError("eta must lie in [0, 1]");
  if (eta == 1.0) return h_prev;
  return eta * h_prev + std::sqrt(1.0 - eta * eta) * draw_circular_gaussian(rng);
}

double start_probability_for_duty(double duty, double stop_prob) {
  if (!(duty > 0.0 && duty < 1.0)) throw ValueError("duty must lie in (0, 1)");
  return duty * stop_prob / (1.0 - duty);
}

std::vector<bool> markov_activity(double stop_prob, double start_prob,
                                  Index t_slots, Rng& rng,
                                  std::optional<bool> initial_active) {
  if (stop_prob < 0.0 || stop_prob > 1.0 || start_prob < 0.0 || start_prob > 1.0) {
    throw ValueError("transition probabilities must lie in [0, 1]");
  }
  std::vector<bool> out(static_cast<std::size_t>(std::max<Index>(t_slots, 0)));
  if (out.empty()) return out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool active;
  if (initial_active) {
    active = *initial_active;
  } else if (stop_prob + start_prob == 0.0) {
    active = false;
  } else {
    active = u(rng) < start_prob / (stop_prob + start_prob);
  }
  out[0] = active;
  for (std::size_t t = 1; t < out.size(); ++t) {
    const double draw = u(rng);
    active = active ? !(draw < stop_prob) : draw < start_prob;
    out[t] = active;
  }
  return out;
}

ScenarioTruth generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = cfg.seed;
  const Index n_pu = cfg.n_pu;
  const Index n_su = cfg.n_su;
  const Index slots = cfg.t_slots;
  const auto n_slots = static_cast<std::size_t>(slots);

  ScenarioTruth truth;
  {
    Rng rng = substream(seed, {kPositions});
    truth.positions = place_network(cfg, rng);
  }

  truth.p_true = Matrix::Zero(n_pu, slots);
  truth.activity = Matrix::Zero(n_pu, slots);
  for (Index j = 0; j < n_pu; ++j) {
    Rng act_rng = substream(seed, {kActivity, static_cast<std::uint64_t>(j)});
    Rng pow_rng = substream(seed, {kPower, static_cast<std::uint64_t>(j)});
    const double a = draw_uniform(act_rng, cfg.a_range);
    const double b = start_probability_for_duty(cfg.duty, a);
    truth.stop_prob.push_back(a);
    truth.start_prob.push_back(b);
    const std::vector<bool> on = markov_activity(a, b, slots, act_rng);
    double power = 0.0;
    for (Index t = 0; t < slots; ++t) {
      const bool now = on[static_cast<std::size_t>(t)];
      const bool before = t > 0 && on[static_cast<std::size_t>(t - 1)];
      if (now && !before) power = draw_uniform(pow_rng, cfg.power_range);
      truth.activity(j, t) = now ? 1.0 : 0.0;
      truth.p_true(j, t) = now ? power : 0.0;
    }
  }

  const double c = cfg.effective_channel_constant();
  truth.gains_per_slot.assign(n_slots, Matrix::Zero(n_su, n_pu));
  for (Index r = 0; r < n_su; ++r) {
    for (Index j = 0; j < n_pu; ++j) {
      Rng rng = substream(seed, {kFading, static_cast<std::uint64_t>(r),
                                 static_cast<std::uint64_t>(j)});
      const double large_scale =
          c * path_gain(distance(truth.positions.su[static_cast<std::size_t>(r)],
                                 truth.positions.pu[static_cast<std::size_t>(j)]),
                        cfg);
      std::complex<double> h = draw_circular_gaussian(rng);
      for (std::size_t t = 0; t < n_slots; ++t) {
        if (t > 0) h = fading_step(h, cfg.eta, rng);
        truth.gains_per_slot[t](r, j) = large_scale * std::norm(h);
      }
    }
  }

  truth.s_clean.resize(n_su, slots);
  for (Index t = 0; t < slots; ++t) {
    truth.s_clean.col(t) =
        truth.gains_per_slot[static_cast<std::size_t>(t)] * truth.p_true.col(t);
  }

  Rng noise_rng = substream(seed, {kNoise});
  Rng mask_rng = substream(seed, {kMask});
  std::normal_distribution<double> noise(0.0, std::sqrt(cfg.noise_var));
  std::bernoulli_distribution keep(cfg.p_obs);
  Matrix values(n_su, slots);
  Matrix mask(n_su, slots);
  for (Index t = 0; t < slots; ++t) {
    for (Index r = 0; r < n_su; ++r) {
      const double z = cfg.noise_var > 0.0 ? noise(noise_rng) : 0.0;
      values(r, t) = std::max(truth.s_clean(r, t) + z, 0.0);
      mask(r, t) = keep(mask_rng) ? 1.0 : 0.0;
    }
  }
  truth.observed = MaskedMatrix(std::move(values), std::move(mask));
  return truth;
}

void export_scenario(const std::filesystem::path& dir,
                     const ScenarioConfig& cfg, const ScenarioTruth& truth) {
  std::filesystem::create_directories(dir);
  write_masked_csv(dir / "observed.csv", truth.observed);
  write_dense_csv(dir / "truth_s.csv", truth.s_clean);
  write_dense_csv(dir / "truth_p.csv", truth.p_true);
  write_dense_csv(dir / "activity.csv", truth.activity);
  nlohmann::json j = cfg;
  j["effective_channel_constant"] = cfg.effective_channel_constant();
  std::ofstream out(dir / "config.json");
  if (!out) throw IoError("cannot write " + (dir / "config.json").string());
  out << j.dump(2) << '\n';
}

}  // namespace pcnmf::crsim
