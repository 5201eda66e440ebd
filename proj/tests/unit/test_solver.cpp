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

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "pcnmf/errors.hpp"
#include "pcnmf/solver.hpp"

using namespace pcnmf;

namespace {

struct Instance {
  MaskedMatrix s;
  Matrix gains;
  Matrix activations;
};

Instance random_instance(std::mt19937_64& rng, Index rows, Index slots, Index rank,
                         double p_obs) {
  return {MaskedMatrix(testing::uniform(rows, slots, rng, 0.0, 2.0),
                       testing::bernoulli_mask(rows, slots, p_obs, rng)),
          testing::uniform(rows, rank, rng, 0.1, 1.0),
          testing::uniform(rank, slots, rng, 0.1, 1.0)};
}

double fit_loop(const Matrix& s, const Matrix& w, const Matrix& g, const Matrix& p) {
  double sum = 0.0;
  for (Index r = 0; r < s.rows(); ++r) {
    for (Index t = 0; t < s.cols(); ++t) {
      double gp = 0.0;
      for (Index j = 0; j < g.cols(); ++j) gp += g(r, j) * p(j, t);
      sum += w(r, t) * 0.5 * (s(r, t) - gp) * (s(r, t) - gp);
    }
  }
  return sum;
}

// Fit restricted to slot t, evaluated at column x.
double slot_fit(const MaskedMatrix& s, const Matrix& g, Index t, const Vector& x) {
  double sum = 0.0;
  for (Index r = 0; r < s.rows(); ++r) {
    double gp = 0.0;
    for (Index j = 0; j < g.cols(); ++j) gp += g(r, j) * x(j);
    sum += s.mask()(r, t) * 0.5 * (s.values()(r, t) - gp) * (s.values()(r, t) - gp);
  }
  return sum;
}

double slot_transitions(const Matrix& p, const ReweightMatrix& y, Index t,
                        const Vector& x) {
  double sum = 0.0;
  for (Index j = 0; j < p.rows(); ++j) {
    if (t > 0) sum += y(j, t) * (x(j) - p(j, t - 1)) * (x(j) - p(j, t - 1));
    if (t + 1 < p.cols()) sum += y(j, t + 1) * (p(j, t + 1) - x(j)) * (p(j, t + 1) - x(j));
  }
  return sum;
}

}  // namespace

TEST_CASE("weighted fit and penalty match direct loops") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const Instance in = random_instance(rng, 7, 11, 3, 0.6);
    CHECK(weighted_fit(in.s, in.gains, in.activations) ==
          doctest::Approx(fit_loop(in.s.values(), in.s.mask(), in.gains, in.activations))
              .epsilon(1e-13));
    const double eps = 0.05;
    double pen = 0.0;
    for (Index j = 0; j < 3; ++j) {
      for (Index t = 1; t < 11; ++t) {
        const double d = in.activations(j, t) - in.activations(j, t - 1);
        pen += d * d / (d * d + eps * eps);
      }
    }
    CHECK(penalty_smoothed(in.activations, eps) == doctest::Approx(pen).epsilon(1e-13));
  }
  CHECK(penalty_smoothed(Matrix::Ones(3, 1), 1e-3) == 0.0);
  CHECK_THROWS_AS(penalty_smoothed(Matrix::Ones(3, 4), 0.0), ValueError);
}

TEST_CASE("penalty approaches the transition count as epsilon shrinks") {
  Matrix p(2, 6);
  p << 1, 1, 2, 2, 2, 0.5,
       0, 0, 0, 3, 3, 3;
  CHECK(penalty_smoothed(p, 1e-12) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(penalty_smoothed(p, 1e6) < 1e-10);
}

TEST_CASE("reweights use squared transitions with zero boundary columns") {
  std::mt19937_64 rng(22);
  const Matrix p = testing::uniform(4, 9, rng);
  const double eps = 1e-3;
  const ReweightMatrix y = compute_reweights(p, eps);
  CHECK(y.slots() == 9);
  for (Index j = 0; j < 4; ++j) {
    CHECK(y(j, 0) == 0.0);
    CHECK(y(j, 9) == 0.0);
    for (Index t = 1; t < 9; ++t) {
      const double d = p(j, t) - p(j, t - 1);
      CHECK(y(j, t) == doctest::Approx(1.0 / (d * d + eps)).epsilon(1e-14));
    }
  }
}

TEST_CASE("activation gradient matches central finite differences") {
  std::mt19937_64 rng(23);
  int checked = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const Instance in = random_instance(rng, 6, 8, 3, 0.7);
    const Matrix grad = activation_gradient(in.s, in.gains, in.activations);
    for (Index j = 0; j < 3; ++j) {
      for (Index t = 0; t < 8; ++t) {
        const double h = 1e-6;
        Matrix plus = in.activations;
        Matrix minus = in.activations;
        plus(j, t) += h;
        minus(j, t) -= h;
        const double fd = (weighted_fit(in.s, in.gains, plus) -
                           weighted_fit(in.s, in.gains, minus)) / (2.0 * h);
        const double scale = std::max(std::abs(fd), 1e-3);
        CHECK(std::abs(grad(j, t) - fd) / scale < 1e-5);
        ++checked;
      }
    }
  }
  CHECK(checked == 480);
}

TEST_CASE("unpenalized activation step is the multiplicative rule") {
  std::mt19937_64 rng(24);
  SolverConfig cfg;
  cfg.beta = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const Instance in = random_instance(rng, 5, 7, 2, 0.8);
    const ReweightMatrix y = compute_reweights(in.activations, cfg.epsilon);
    const Matrix got = update_activations(in.s, in.gains, in.activations, y, cfg);
    // p <- p * G^T(W.*S) / G^T(W.*(G P)), written out elementwise.
    for (Index j = 0; j < 2; ++j) {
      for (Index t = 0; t < 7; ++t) {
        double num = 0.0;
        double den = 0.0;
        for (Index r = 0; r < 5; ++r) {
          double gp = 0.0;
          for (Index k = 0; k < 2; ++k) gp += in.gains(r, k) * in.activations(k, t);
          num += in.gains(r, j) * in.s.mask()(r, t) * in.s.values()(r, t);
          den += in.gains(r, j) * in.s.mask()(r, t) * gp;
        }
        const double expect = std::max(in.activations(j, t) * num / den, kActivationFloor);
        CHECK(got(j, t) == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("gains step matches the weighted multiplicative rule") {
  std::mt19937_64 rng(25);
  for (int rep = 0; rep < 10; ++rep) {
    const Instance in = random_instance(rng, 6, 9, 3, 0.6);
    const double guard = 1e-12;
    const Matrix got = update_gains(in.s, FactorPair(in.gains, in.activations), guard);
    for (Index r = 0; r < 6; ++r) {
      for (Index j = 0; j < 3; ++j) {
        double num = 0.0;
        double den = 0.0;
        for (Index t = 0; t < 9; ++t) {
          double gp = 0.0;
          for (Index k = 0; k < 3; ++k) gp += in.gains(r, k) * in.activations(k, t);
          num += in.s.mask()(r, t) * in.s.values()(r, t) * in.activations(j, t);
          den += in.s.mask()(r, t) * gp * in.activations(j, t);
        }
        CHECK(got(r, j) == doctest::Approx(in.gains(r, j) * num / (den + guard)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("gains step never increases the fit") {
  std::mt19937_64 rng(26);
  for (int rep = 0; rep < 50; ++rep) {
    const Instance in = random_instance(rng, 8, 12, 3, 0.5);
    const FactorPair f(in.gains, in.activations);
    const Matrix g = update_gains(in.s, f);
    CHECK(weighted_fit(in.s, g, in.activations) <=
          weighted_fit(in.s, f) * (1.0 + 1e-12));
  }
}

TEST_CASE("huge beta pulls each slot to the weighted mean of its neighbours") {
  std::mt19937_64 rng(27);
  const Instance in = random_instance(rng, 5, 6, 2, 0.7);
  SolverConfig cfg;
  cfg.beta = 1e9;
  cfg.epsilon = 0.1;
  const ReweightMatrix y = compute_reweights(in.activations, cfg.epsilon);
  const Matrix got = update_activations(in.s, in.gains, in.activations, y, cfg);
  const Matrix& p = in.activations;
  for (Index j = 0; j < 2; ++j) {
    for (Index t = 1; t + 1 < 6; ++t) {
      const double expect =
          (y(j, t) * p(j, t - 1) + y(j, t + 1) * p(j, t + 1)) / (y(j, t) + y(j, t + 1));
      CHECK(got(j, t) == doctest::Approx(expect).epsilon(1e-6));
    }
    CHECK(got(j, 0) == doctest::Approx(p(j, 1)).epsilon(1e-6));
    CHECK(got(j, 5) == doctest::Approx(p(j, 4)).epsilon(1e-6));
  }
}

TEST_CASE("penalized surrogate majorizes and is tight at the anchor") {
  std::mt19937_64 rng(28);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int rep = 0; rep < 30; ++rep) {
    const Instance in = random_instance(rng, 6, 5, 3, 0.7);
    const double beta = rep % 3 == 0 ? 0.0 : 0.5;
    const ReweightMatrix y = compute_reweights(in.activations, 0.01);
    for (Index t = 0; t < 5; ++t) {
      const Vector anchor = in.activations.col(t);
      const double exact = slot_fit(in.s, in.gains, t, anchor) +
                           beta * slot_transitions(in.activations, y, t, anchor);
      CHECK(penalized_surrogate(in.s, in.gains, in.activations, y, beta, t, anchor) ==
            doctest::Approx(exact).epsilon(1e-12));
      for (int k = 0; k < 20; ++k) {
        Vector x(3);
        for (Index j = 0; j < 3; ++j) x(j) = u(rng);
        const double g = penalized_surrogate(in.s, in.gains, in.activations, y, beta, t, x);
        const double f = slot_fit(in.s, in.gains, t, x) +
                         beta * slot_transitions(in.activations, y, t, x);
        CHECK(g >= f - 1e-12 * std::max(1.0, f));
      }
    }
  }
}

TEST_CASE("activation step minimizes the separable surrogate") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> jitter(0.0, 0.05);
  SolverConfig cfg;
  cfg.beta = 0.3;
  cfg.epsilon = 0.05;
  for (int rep = 0; rep < 20; ++rep) {
    const Instance in = random_instance(rng, 6, 7, 3, 0.7);
    const ReweightMatrix y = compute_reweights(in.activations, cfg.epsilon);
    const ActivationStep step = activation_step(in.s, in.gains, in.activations, y, cfg);
    double before = 0.0;
    double after = 0.0;
    for (Index t = 0; t < 7; ++t) {
      const Vector x = step.activations.col(t);
      const double at_step =
          penalized_surrogate(in.s, in.gains, in.activations, y, cfg.beta, t, x);
      before += penalized_surrogate(in.s, in.gains, in.activations, y, cfg.beta, t,
                                    in.activations.col(t));
      after += at_step;
      for (int k = 0; k < 10; ++k) {
        Vector z = x;
        for (Index j = 0; j < 3; ++j) z(j) = std::max(0.0, z(j) + jitter(rng));
        CHECK(penalized_surrogate(in.s, in.gains, in.activations, y, cfg.beta, t, z) >=
              at_step - 1e-12);
      }
    }
    CHECK(step.surrogate_before == doctest::Approx(before).epsilon(1e-11));
    CHECK(step.surrogate_after == doctest::Approx(after).epsilon(1e-11));
    CHECK(step.surrogate_after <= step.surrogate_before + 1e-12);
  }
}

TEST_CASE("rescale keeps the product and normalizes gains columns") {
  std::mt19937_64 rng(30);
  const FactorPair f(testing::uniform(5, 3, rng, 0.0, 4.0), testing::uniform(3, 8, rng));
  const FactorPair g = rescale(f);
  for (Index j = 0; j < 3; ++j) CHECK(g.gains().col(j).norm() == doctest::Approx(1.0));
  CHECK((reconstruct(g) - reconstruct(f)).norm() < 1e-12 * reconstruct(f).norm());
  Matrix dead = f.gains();
  dead.col(1).setZero();
  CHECK_THROWS_AS(rescale(FactorPair(dead, f.activations())), DegenerateFactorError);
}

TEST_CASE("solve follows the textbook multiplicative updates up to scaling") {
  std::mt19937_64 rng(31);
  const MaskedMatrix s(testing::uniform(6, 9, rng), testing::bernoulli_mask(6, 9, 0.7, rng));
  SolverConfig cfg;
  cfg.beta = 0.0;
  cfg.rank = 2;
  cfg.max_iters = 30;
  cfg.rel_tol = 0.0;
  cfg.init_seed = 77;
  const FactorPair init = initial_factors(6, 9, cfg);
  Matrix g = init.gains();
  Matrix p = init.activations();
  const Matrix& v = s.values();
  const Matrix& w = s.mask();
  std::vector<Matrix> expected;
  for (int it = 0; it < 30; ++it) {
    p = p.cwiseProduct((g.transpose() * v).cwiseQuotient(g.transpose() * w.cwiseProduct(g * p)));
    g = g.cwiseProduct((v * p.transpose()).cwiseQuotient(w.cwiseProduct(g * p) * p.transpose()));
    expected.push_back(g * p);
  }
  std::size_t seen = 0;
  solve(s, cfg, [&](std::size_t iter, const Matrix& gains, const Matrix& acts) {
    const Matrix& want = expected[iter - 1];
    CHECK((gains * acts - want).cwiseAbs().maxCoeff() < 1e-10 * want.cwiseAbs().maxCoeff());
    ++seen;
  });
  CHECK(seen == 30);
}

TEST_CASE("solve trace: unpenalized fit never increases") {
  std::mt19937_64 rng(32);
  const MaskedMatrix s(testing::uniform(10, 30, rng), testing::bernoulli_mask(10, 30, 0.6, rng));
  SolverConfig cfg;
  cfg.beta = 0.0;
  cfg.rank = 3;
  cfg.max_iters = 200;
  const SolveResult r = solve(s, cfg);
  double prev = r.trace.initial_objective;
  for (const TraceRecord& rec : r.trace.records) {
    CHECK(rec.fit <= prev * (1.0 + 1e-12));
    CHECK(rec.objective == doctest::Approx(rec.fit));
    prev = rec.fit;
  }
}

TEST_CASE("values under a zero mask do not influence the solution") {
  std::mt19937_64 rng(33);
  const Matrix v = testing::uniform(5, 12, rng);
  const Matrix w = testing::bernoulli_mask(5, 12, 0.6, rng);
  Matrix other = v;
  for (Index t = 0; t < 12; ++t)
    for (Index r = 0; r < 5; ++r)
      if (w(r, t) == 0.0) other(r, t) = 1e6 * (r + t + 1);
  SolverConfig cfg;
  cfg.rank = 2;
  cfg.max_iters = 50;
  const SolveResult a = solve(MaskedMatrix(v, w), cfg);
  const SolveResult b = solve(MaskedMatrix(other, w), cfg);
  CHECK(a.factors.gains() == b.factors.gains());
  CHECK(a.factors.activations() == b.factors.activations());
}

TEST_CASE("solve is deterministic and reports convergence") {
  std::mt19937_64 rng(34);
  const MaskedMatrix s(testing::uniform(6, 20, rng), testing::bernoulli_mask(6, 20, 0.7, rng));
  SolverConfig cfg;
  cfg.rank = 2;
  cfg.max_iters = 40;
  const SolveResult a = solve(s, cfg);
  const SolveResult b = solve(s, cfg);
  CHECK(a.factors.gains() == b.factors.gains());
  CHECK(a.factors.activations() == b.factors.activations());
  CHECK(a.trace.iterations() == b.trace.iterations());

  cfg.rel_tol = 10.0;
  const SolveResult quick = solve(s, cfg);
  CHECK(quick.trace.converged);
  CHECK(quick.trace.iterations() == 1);
}

TEST_CASE("single-slot problems have no penalty") {
  const MaskedMatrix s = MaskedMatrix::fully_observed((Matrix(3, 1) << 1.0, 2.0, 3.0).finished());
  SolverConfig cfg;
  cfg.rank = 1;
  cfg.max_iters = 500;
  const SolveResult r = solve(s, cfg);
  CHECK(r.trace.final_objective() == doctest::Approx(r.trace.records.back().fit));
  CHECK(r.trace.records.back().penalty == 0.0);
  CHECK(r.trace.records.back().fit < 1e-10);
}

TEST_CASE("unobserved sensors warn; an all-missing problem returns the start") {
  std::mt19937_64 rng(35);
  Matrix w = testing::bernoulli_mask(4, 10, 0.8, rng);
  w.row(2).setZero();
  SolverConfig cfg;
  cfg.rank = 2;
  cfg.max_iters = 5;
  const SolveResult r = solve(MaskedMatrix(testing::uniform(4, 10, rng), w), cfg);
  REQUIRE(r.trace.warnings.size() == 1);
  CHECK(r.trace.warnings[0].find("sensor 2") != std::string::npos);

  const SolveResult empty = solve(MaskedMatrix(Matrix::Ones(4, 10), Matrix::Zero(4, 10)), cfg);
  const FactorPair init = initial_factors(4, 10, cfg);
  CHECK(empty.trace.iterations() == 0);
  CHECK(empty.factors.gains() == init.gains());
  CHECK(empty.factors.activations() == init.activations());
}

TEST_CASE("infer interpolates across slots with no observations") {
  std::mt19937_64 rng(36);
  const Index rows = 6;
  const Index slots = 9;
  const Matrix gains = testing::uniform(rows, 2, rng, 0.2, 1.0);
  Matrix p(2, slots);
  p << 1, 1, 1, 1, 1, 3, 3, 3, 3,
       2, 2, 2, 2, 2, 2, 2, 2, 2;
  Matrix w = Matrix::Ones(rows, slots);
  w.col(4).setZero();
  const MaskedMatrix s(gains * p, w);
  SolverConfig cfg;
  cfg.beta = 0.05;
  cfg.epsilon = 0.01;
  cfg.max_iters = 3000;
  const InferResult r = infer_activations(s, gains, cfg);
  for (Index j = 0; j < 2; ++j) {
    const double lo = std::min(r.activations(j, 3), r.activations(j, 5));
    const double hi = std::max(r.activations(j, 3), r.activations(j, 5));
    CHECK(r.activations(j, 4) >= lo - 1e-9);
    CHECK(r.activations(j, 4) <= hi + 1e-9);
  }

  // Without the penalty an empty slot has a zero denominator: clamped, floored.
  cfg.beta = 0.0;
  cfg.max_iters = 1;
  const InferResult flat = infer_activations(s, gains, cfg);
  CHECK(flat.trace.records[0].clamped_denominators == 2);
  CHECK(flat.activations(0, 4) == kActivationFloor);
  CHECK_THROWS_AS(infer_activations(s, Matrix::Ones(5, 2), cfg), ShapeError);
}

TEST_CASE("overflowing data raises a numeric failure") {
  const MaskedMatrix s = MaskedMatrix::fully_observed(Matrix::Constant(4, 6, 1e300));
  SolverConfig cfg;
  cfg.rank = 2;
  cfg.max_iters = 20;
  CHECK_THROWS_AS(solve(s, cfg), NumericFailure);
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.beta = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ValueError);
  cfg = SolverConfig{};
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValueError);
  cfg = SolverConfig{};
  cfg.rank = 0;
  CHECK_THROWS_AS(cfg.validate(), ValueError);
  cfg = SolverConfig{};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), ValueError);
}
