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

// Masked measurement matrices and nonnegative factor pairs.
//
// Layout convention: rows are sensors, columns are time slots. Eigen stores
// column-major, so a single time slot is a contiguous column.

#ifndef PCNMF_SPECMAT_HPP_
#define PCNMF_SPECMAT_HPP_

#include <Eigen/Dense>

#include <cstddef>

namespace pcnmf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Measurement matrix with a binary availability mask. Entries at mask == 0
// are overwritten with 0 on construction and never read through the mask, so
// whatever placeholder the caller passes has no effect downstream.
class MaskedMatrix {
 public:
  MaskedMatrix() = default;
  MaskedMatrix(Matrix values, Matrix mask);

  static MaskedMatrix fully_observed(Matrix values);

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }

  // Observed values, 0 at missing positions (so values() == W .* S).
  const Matrix& values() const { return values_; }
  const Matrix& mask() const { return mask_; }

  bool observed(Index r, Index t) const { return mask_(r, t) != 0.0; }
  std::size_t observed_count() const;

  // Columns [first, first + count).
  MaskedMatrix slots(Index first, Index count) const;

  // Same mask, values multiplied by factor (factor > 0).
  MaskedMatrix scaled(double factor) const;

  // Row r multiplied by factors(r) (every factor > 0).
  MaskedMatrix row_scaled(const Vector& factors) const;

  // Mean over observed entries; 0 when nothing is observed.
  double mean_observed() const;

  // Per row, 1 / (mean observed value); 1 for rows with no observed
  // entries or an all-zero observed sum. row_scaled(row_normalizers())
  // gives every informative row unit mean.
  Vector row_normalizers() const;

 private:
  Matrix values_;
  Matrix mask_;
};

// Gains (sensors x rank) and activations (rank x slots), both nonnegative.
class FactorPair {
 public:
  FactorPair() = default;
  FactorPair(Matrix gains, Matrix activations);

  const Matrix& gains() const { return gains_; }
  const Matrix& activations() const { return activations_; }
  Index rank() const { return gains_.cols(); }

 private:
  Matrix gains_;
  Matrix activations_;
};

// Transition weights of the reweighted penalty: rank x (slots + 1). Column c
// (0-based) weighs the transition between slot c-1 and slot c; the first and
// last columns are structurally zero.
class ReweightMatrix {
 public:
  ReweightMatrix() = default;
  explicit ReweightMatrix(Matrix weights);

  const Matrix& weights() const { return weights_; }
  double operator()(Index j, Index c) const { return weights_(j, c); }
  Index rank() const { return weights_.rows(); }
  Index slots() const { return weights_.cols() - 1; }

 private:
  Matrix weights_;
};

// W .* (S - gains * activations); exactly zero at missing positions.
Matrix masked_product_residual(const MaskedMatrix& s, const FactorPair& f);

// gains * activations.
Matrix reconstruct(const FactorPair& f);

// Throws ShapeError unless gains/activations agree with s.
void check_compatible(const MaskedMatrix& s, const Matrix& gains,
                      const Matrix& activations);

}  // namespace pcnmf

#endif  // PCNMF_SPECMAT_HPP_
