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

#include "pcnmf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "pcnmf/errors.hpp"

namespace pcnmf {

namespace {

constexpr double kInitLow = 0.1;
constexpr double kInitHigh = 1.1;

// y-weighted transition terms touching slot t, evaluated at candidate x.
double transition_terms(const Matrix& anchor, const ReweightMatrix& y, Index t,
                        const Vector& x) {
  const Index slots = anchor.cols();
  double sum = 0.0;
  for (Index j = 0; j < anchor.rows(); ++j) {
    if (t > 0) {
      const double d = x(j) - anchor(j, t - 1);
      sum += y(j, t) * d * d;
    }
    if (t + 1 < slots) {
      const double d = anchor(j, t + 1) - x(j);
      sum += y(j, t + 1) * d * d;
    }
  }
  return sum;
}

void fill_uniform(Matrix& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(kInitLow, kInitHigh);
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
  }
}

bool stop_on_change(double previous, double current, double rel_tol) {
  return std::abs(previous - current) <= rel_tol * std::abs(previous);
}

void check_finite(std::size_t iteration, const Matrix& gains,
                  const Matrix& activations) {
  if (!gains.allFinite()) throw NumericFailure(iteration, "gains not finite");
  if (!activations.allFinite()) {
    throw NumericFailure(iteration, "activations not finite");
  }
}

void warn_unobserved_rows(const MaskedMatrix& s, SolveTrace& trace) {
  for (Index r = 0; r < s.rows(); ++r) {
    if (s.mask().row(r).sum() == 0.0) {
      trace.warnings.push_back("sensor " + std::to_string(r) +
                               " has no observed entries");
    }
  }
}

// Rescale in place; a dead gains column is redrawn from the init
// distribution (continuing `rng`) and rescaling is retried.
std::size_t rescale_or_revive(Matrix& gains, Matrix& activations,
                              std::mt19937_64& rng) {
  std::size_t revived = 0;
  std::uniform_real_distribution<double> dist(kInitLow, kInitHigh);
  for (Index j = 0; j < gains.cols(); ++j) {
    double norm = gains.col(j).norm();
    if (norm == 0.0) {
      for (Index r = 0; r < gains.rows(); ++r) gains(r, j) = dist(rng);
      norm = gains.col(j).norm();
      ++revived;
    }
    gains.col(j) /= norm;
    activations.row(j) *= norm;
  }
  return revived;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(beta >= 0.0)) throw ValueError("beta must be >= 0");
  if (!(epsilon > 0.0)) throw ValueError("epsilon must be > 0");
  if (rank < 1) throw ValueError("rank must be >= 1");
  if (max_iters < 1) throw ValueError("max_iters must be >= 1");
  if (!(rel_tol >= 0.0)) throw ValueError("rel_tol must be >= 0");
  if (!(guard > 0.0)) throw ValueError("guard must be > 0");
}

double weighted_fit(const MaskedMatrix& s, const Matrix& gains,
                    const Matrix& activations) {
  check_compatible(s, gains, activations);
  const Matrix residual = s.values() - s.mask().cwiseProduct(gains * activations);
  return 0.5 * residual.squaredNorm();
}

double weighted_fit(const MaskedMatrix& s, const FactorPair& f) {
  return weighted_fit(s, f.gains(), f.activations());
}

double penalty_smoothed(const Matrix& activations, double epsilon) {
  if (!(epsilon > 0.0)) throw ValueError("epsilon must be > 0");
  const double eps2 = epsilon * epsilon;
  double sum = 0.0;
  for (Index t = 1; t < activations.cols(); ++t) {
    for (Index j = 0; j < activations.rows(); ++j) {
      const double d = activations(j, t) - activations(j, t - 1);
      const double d2 = d * d;
      sum += d2 / (d2 + eps2);
    }
  }
  return sum;
}

double objective(const MaskedMatrix& s, const FactorPair& f,
                 const SolverConfig& cfg) {
  return weighted_fit(s, f) +
         cfg.beta * penalty_smoothed(f.activations(), cfg.epsilon);
}

ReweightMatrix compute_reweights(const Matrix& previous_activations,
                                 double epsilon) {
  if (!(epsilon > 0.0)) throw ValueError("epsilon must be > 0");
  const Index slots = previous_activations.cols();
  Matrix y = Matrix::Zero(previous_activations.rows(), slots + 1);
  for (Index t = 1; t < slots; ++t) {
    for (Index j = 0; j < y.rows(); ++j) {
      const double d = previous_activations(j, t) - previous_activations(j, t - 1);
      y(j, t) = 1.0 / (d * d + epsilon);
    }
  }
  return ReweightMatrix(std::move(y));
}

Matrix activation_gradient(const MaskedMatrix& s, const Matrix& gains,
                           const Matrix& activations) {
  check_compatible(s, gains, activations);
  const Matrix modeled = s.mask().cwiseProduct(gains * activations);
  return gains.transpose() * (modeled - s.values());
}

double penalized_surrogate(const MaskedMatrix& s, const Matrix& gains,
                           const Matrix& anchor, const ReweightMatrix& y,
                           double beta, Index t, const Vector& candidate) {
  check_compatible(s, gains, anchor);
  if (y.rank() != anchor.rows() || y.slots() != anchor.cols()) {
    throw ShapeError("reweights do not match activations");
  }
  const Vector p = anchor.col(t).cwiseMax(kActivationFloor);
  const auto w = s.mask().col(t);
  const Vector modeled = w.cwiseProduct(gains * p);
  const Vector residual = s.values().col(t) - modeled;
  const double fit = 0.5 * residual.squaredNorm();
  const Vector q = gains.transpose() * modeled;
  const Vector grad = q - gains.transpose() * s.values().col(t);
  const Vector delta = candidate - p;
  double quad = 0.0;
  for (Index j = 0; j < p.size(); ++j) quad += (q(j) / p(j)) * delta(j) * delta(j);
  return fit + delta.dot(grad) + 0.5 * quad +
         beta * transition_terms(anchor, y, t, candidate);
}

ActivationStep activation_step(const MaskedMatrix& s, const Matrix& gains,
                               const Matrix& activations,
                               const ReweightMatrix& y,
                               const SolverConfig& cfg) {
  check_compatible(s, gains, activations);
  if (y.rank() != activations.rows() || y.slots() != activations.cols()) {
    throw ShapeError("reweights do not match activations");
  }
  const Index rank = activations.rows();
  const Index slots = activations.cols();
  const double beta = cfg.beta;

  const Matrix anchor = activations.cwiseMax(kActivationFloor);
  const Matrix modeled = s.mask().cwiseProduct(gains * anchor);
  const Matrix data_term = gains.transpose() * s.values();  // G^T (W .* S)
  const Matrix q = gains.transpose() * modeled;             // G^T (W .* G P)

  ActivationStep step;
  step.activations.resize(rank, slots);
  for (Index t = 0; t < slots; ++t) {
    const double fit_t =
        0.5 * (s.values().col(t) - modeled.col(t)).squaredNorm();
    double before = fit_t;
    double after = fit_t;
    for (Index j = 0; j < rank; ++j) {
      const double p = anchor(j, t);
      const double k = q(j, t) / p;
      const double y_in = t > 0 ? y(j, t) : 0.0;
      const double y_out = t + 1 < slots ? y(j, t + 1) : 0.0;
      const double left = t > 0 ? anchor(j, t - 1) : 0.0;
      const double right = t + 1 < slots ? anchor(j, t + 1) : 0.0;
      // -grad_j + p_j k_jj is exactly (G^T (w_t .* s_t))_j.
      const double numer =
          data_term(j, t) + 2.0 * beta * (y_in * left + y_out * right);
      double denom = k + 2.0 * beta * (y_in + y_out);
      if (!(denom >= cfg.guard)) {
        denom = cfg.guard;
        ++step.clamped_denominators;
      }
      const double value = std::max(numer / denom, kActivationFloor);
      step.activations(j, t) = value;

      const double grad = q(j, t) - data_term(j, t);
      const double delta = value - p;
      after += delta * grad + 0.5 * k * delta * delta;
      if (t > 0) {
        before += beta * y_in * (p - left) * (p - left);
        after += beta * y_in * (value - left) * (value - left);
      }
      if (t + 1 < slots) {
        before += beta * y_out * (right - p) * (right - p);
        after += beta * y_out * (right - value) * (right - value);
      }
    }
    step.surrogate_before += before;
    step.surrogate_after += after;
  }
  return step;
}

Matrix update_activations(const MaskedMatrix& s, const Matrix& gains,
                          const Matrix& activations, const ReweightMatrix& y,
                          const SolverConfig& cfg) {
  return activation_step(s, gains, activations, y, cfg).activations;
}

Matrix update_gains(const MaskedMatrix& s, const FactorPair& f, double guard) {
  check_compatible(s, f.gains(), f.activations());
  const Matrix& p = f.activations();
  const Matrix numer = s.values() * p.transpose();
  Matrix denom = s.mask().cwiseProduct(f.gains() * p) * p.transpose();
  denom.array() += guard;
  return f.gains().cwiseProduct(numer.cwiseQuotient(denom));
}

FactorPair rescale(const FactorPair& f) {
  Matrix gains = f.gains();
  Matrix activations = f.activations();
  for (Index j = 0; j < gains.cols(); ++j) {
    const double norm = gains.col(j).norm();
    if (norm == 0.0) throw DegenerateFactorError(static_cast<std::size_t>(j));
    gains.col(j) /= norm;
    activations.row(j) *= norm;
  }
  return FactorPair(std::move(gains), std::move(activations));
}

FactorPair initial_factors(Index rows, Index slots, const SolverConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.init_seed);
  Matrix gains(rows, cfg.rank);
  Matrix activations(cfg.rank, slots);
  fill_uniform(gains, rng);
  fill_uniform(activations, rng);
  return FactorPair(std::move(gains), std::move(activations));
}

SolveResult solve(const MaskedMatrix& s, const SolverConfig& cfg,
                  const IterationObserver& observer) {
  cfg.validate();
  // Same stream as initial_factors; continues for column revival.
  std::mt19937_64 rng(cfg.init_seed);
  Matrix gains(s.rows(), cfg.rank);
  Matrix activations(cfg.rank, s.cols());
  fill_uniform(gains, rng);
  fill_uniform(activations, rng);

  SolveResult result;
  SolveTrace& trace = result.trace;
  warn_unobserved_rows(s, trace);
  double previous = weighted_fit(s, gains, activations) +
                    cfg.beta * penalty_smoothed(activations, cfg.epsilon);
  trace.initial_objective = previous;

  if (s.observed_count() == 0) {
    trace.warnings.push_back("no observed entries; returning initialization");
    trace.converged = true;
    result.factors = FactorPair(std::move(gains), std::move(activations));
    return result;
  }

  for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
    TraceRecord rec;
    rec.iteration = iter;

    const ReweightMatrix y = compute_reweights(activations, cfg.epsilon);
    ActivationStep step = activation_step(s, gains, activations, y, cfg);
    activations = std::move(step.activations);
    rec.surrogate_before = step.surrogate_before;
    rec.surrogate_after = step.surrogate_after;
    rec.clamped_denominators = step.clamped_denominators;

    const double penalty_mid = penalty_smoothed(activations, cfg.epsilon);
    rec.objective_before_gains =
        weighted_fit(s, gains, activations) + cfg.beta * penalty_mid;
    gains = update_gains(s, FactorPair(std::move(gains), activations), cfg.guard);
    rec.objective_after_gains =
        weighted_fit(s, gains, activations) + cfg.beta * penalty_mid;

    rec.reinitialized_columns = rescale_or_revive(gains, activations, rng);
    check_finite(iter, gains, activations);

    rec.fit = weighted_fit(s, gains, activations);
    rec.penalty = penalty_smoothed(activations, cfg.epsilon);
    rec.objective = rec.fit + cfg.beta * rec.penalty;
    if (!std::isfinite(rec.objective)) {
      throw NumericFailure(iter, "objective not finite");
    }
    trace.records.push_back(rec);
    if (observer) observer(iter, gains, activations);

    if (stop_on_change(previous, rec.objective, cfg.rel_tol)) {
      trace.converged = true;
      break;
    }
    previous = rec.objective;
  }
  result.factors = FactorPair(std::move(gains), std::move(activations));
  return result;
}

InferResult infer_activations(const MaskedMatrix& s, const Matrix& gains,
                              const SolverConfig& cfg,
                              const IterationObserver& observer) {
  cfg.validate();
  if (gains.rows() != s.rows()) {
    throw ShapeError("gains rows " + std::to_string(gains.rows()) +
                     " vs data rows " + std::to_string(s.rows()));
  }
  std::mt19937_64 rng(cfg.init_seed);
  Matrix activations(gains.cols(), s.cols());
  fill_uniform(activations, rng);
  // Validates nonnegativity of the frozen gains.
  const FactorPair frozen(gains, activations);

  InferResult result;
  SolveTrace& trace = result.trace;
  warn_unobserved_rows(s, trace);
  double previous = weighted_fit(s, gains, activations) +
                    cfg.beta * penalty_smoothed(activations, cfg.epsilon);
  trace.initial_objective = previous;

  for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
    TraceRecord rec;
    rec.iteration = iter;
    const ReweightMatrix y = compute_reweights(activations, cfg.epsilon);
    ActivationStep step = activation_step(s, gains, activations, y, cfg);
    activations = std::move(step.activations);
    rec.surrogate_before = step.surrogate_before;
    rec.surrogate_after = step.surrogate_after;
    rec.clamped_denominators = step.clamped_denominators;
    check_finite(iter, gains, activations);

    rec.fit = weighted_fit(s, gains, activations);
    rec.penalty = penalty_smoothed(activations, cfg.epsilon);
    rec.objective = rec.fit + cfg.beta * rec.penalty;
    rec.objective_before_gains = rec.objective;
    rec.objective_after_gains = rec.objective;
    trace.records.push_back(rec);
    if (observer) observer(iter, gains, activations);

    if (stop_on_change(previous, rec.objective, cfg.rel_tol)) {
      trace.converged = true;
      break;
    }
    previous = rec.objective;
  }
  result.activations = std::move(activations);
  return result;
}

}  // namespace pcnmf
