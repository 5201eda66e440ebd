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

// Piecewise-constant weighted NMF solved by majorization-minimization.
//
// Problem:
//   minimize  D_W(S | G P) + beta * F_eps(P)   subject to G >= 0, P >= 0
// with
//   D_W   = sum_{r,t} w_rt * 0.5 * (s_rt - (G P)_rt)^2
//   F_eps = sum_{t>=1} sum_j rho(p_jt - p_j(t-1)),  rho(x) = x^2 / (x^2 + eps^2)
//
// Each outer iteration:
//   1. y_jt = 1 / ((p_jt - p_j(t-1))^2 + eps) from the current P,
//   2. one MM sweep over every slot: p_t <- argmin of the diagonal quadratic
//      majorizer of the fit plus the y-weighted transition terms,
//   3. weighted multiplicative update of G,
//   4. rescale (G, P) -> (G L^-1, L P) with L = diag(||g_j||_2).
//
// With beta = 0 steps 2 and 3 are the classical weighted Euclidean
// multiplicative updates.

#ifndef PCNMF_SOLVER_HPP_
#define PCNMF_SOLVER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pcnmf/specmat.hpp"

namespace pcnmf {

// Activations are clamped to at least this after every P update; the
// majorizer curvature divides by p_jt.
inline constexpr double kActivationFloor = 1e-12;

struct SolverConfig {
  double beta = 5e-3;
  // Added to the squared transition in the reweights; its square is the
  // smoothing constant of rho.
  double epsilon = 1e-2;
  Index rank = 5;
  std::size_t max_iters = 1000;
  // Stop when |objective change| <= rel_tol * previous objective.
  double rel_tol = 1e-8;
  std::uint64_t init_seed = 0;
  double guard = 1e-12;

  void validate() const;
};

struct TraceRecord {
  std::size_t iteration = 0;  // 1-based
  double fit = 0.0;           // after the full iteration
  double penalty = 0.0;
  double objective = 0.0;     // fit + beta * penalty
  // Sums over slots of the penalized majorizer, at the old and new P.
  double surrogate_before = 0.0;
  double surrogate_after = 0.0;
  // Objective around the gains step (before rescaling).
  double objective_before_gains = 0.0;
  double objective_after_gains = 0.0;
  std::size_t clamped_denominators = 0;
  std::size_t reinitialized_columns = 0;
};

struct SolveTrace {
  double initial_objective = 0.0;
  std::vector<TraceRecord> records;
  std::vector<std::string> warnings;
  bool converged = false;

  std::size_t iterations() const { return records.size(); }
  double final_objective() const {
    return records.empty() ? initial_objective : records.back().objective;
  }
};

struct SolveResult {
  FactorPair factors;
  SolveTrace trace;
};

struct InferResult {
  Matrix activations;
  SolveTrace trace;
};

// Called after every completed outer iteration with the current iterate.
using IterationObserver =
    std::function<void(std::size_t iteration, const Matrix& gains,
                       const Matrix& activations)>;

double weighted_fit(const MaskedMatrix& s, const Matrix& gains,
                    const Matrix& activations);
double weighted_fit(const MaskedMatrix& s, const FactorPair& f);

double penalty_smoothed(const Matrix& activations, double epsilon);

double objective(const MaskedMatrix& s, const FactorPair& f,
                 const SolverConfig& cfg);

ReweightMatrix compute_reweights(const Matrix& previous_activations,
                                 double epsilon);

// Column t is the gradient of the slot-t fit with respect to p_t:
// -G^T (w_t .* s_t - w_t .* (G p_t)).
Matrix activation_gradient(const MaskedMatrix& s, const Matrix& gains,
                           const Matrix& activations);

// Penalized majorizer of slot t anchored at `anchor` (the current P),
// evaluated at `candidate`.
double penalized_surrogate(const MaskedMatrix& s, const Matrix& gains,
                           const Matrix& anchor, const ReweightMatrix& y,
                           double beta, Index t, const Vector& candidate);

struct ActivationStep {
  Matrix activations;
  double surrogate_before = 0.0;
  double surrogate_after = 0.0;
  std::size_t clamped_denominators = 0;
};

// One MM sweep over all slots. Each slot reads only the incoming iterate.
ActivationStep activation_step(const MaskedMatrix& s, const Matrix& gains,
                               const Matrix& activations,
                               const ReweightMatrix& y,
                               const SolverConfig& cfg);

Matrix update_activations(const MaskedMatrix& s, const Matrix& gains,
                          const Matrix& activations, const ReweightMatrix& y,
                          const SolverConfig& cfg);

Matrix update_gains(const MaskedMatrix& s, const FactorPair& f,
                    double guard = 1e-12);

// Unit 2-norm gains columns, scale moved into activations. Throws
// DegenerateFactorError on a zero column.
FactorPair rescale(const FactorPair& f);

// The initialization solve() starts from: entries i.i.d. uniform on
// (0.1, 1.1), gains drawn first, both column-major, seeded by init_seed.
FactorPair initial_factors(Index rows, Index slots, const SolverConfig& cfg);

SolveResult solve(const MaskedMatrix& s, const SolverConfig& cfg,
                  const IterationObserver& observer = {});

// Activations for fixed gains: reweight + P sweep only, no gains update and
// no rescaling. Starts from uniform (0.1, 1.1) entries seeded by init_seed.
InferResult infer_activations(const MaskedMatrix& s, const Matrix& gains,
                              const SolverConfig& cfg,
                              const IterationObserver& observer = {});

}  // namespace pcnmf

#endif  // PCNMF_SOLVER_HPP_
