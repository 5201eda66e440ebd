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

#include "pcnmf/specmat.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "pcnmf/errors.hpp"

namespace pcnmf {

namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_nonnegative(const Matrix& m, const char* what) {
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) {
      const double v = m(r, c);
      if (!std::isfinite(v) || v < 0.0) {
        throw ValueError(std::string(what) + " entry (" + std::to_string(r) +
                         "," + std::to_string(c) +
                         ") is negative or not finite");
      }
    }
  }
}

}  // namespace

MaskedMatrix::MaskedMatrix(Matrix values, Matrix mask)
    : values_(std::move(values)), mask_(std::move(mask)) {
  if (values_.rows() != mask_.rows() || values_.cols() != mask_.cols()) {
    throw ShapeError("values " + dims(values_) + " vs mask " + dims(mask_));
  }
  for (Index t = 0; t < values_.cols(); ++t) {
    for (Index r = 0; r < values_.rows(); ++r) {
      const double w = mask_(r, t);
      if (w != 0.0 && w != 1.0) {
        throw ValueError("mask entries must be 0 or 1");
      }
      if (w == 0.0) {
        values_(r, t) = 0.0;
        continue;
      }
      const double v = values_(r, t);
      if (!std::isfinite(v) || v < 0.0) {
        throw ValueError("observed entry (" + std::to_string(r) + "," +
                         std::to_string(t) + ") is negative or not finite");
      }
    }
  }
}

MaskedMatrix MaskedMatrix::fully_observed(Matrix values) {
  Matrix mask = Matrix::Ones(values.rows(), values.cols());
  return MaskedMatrix(std::move(values), std::move(mask));
}

std::size_t MaskedMatrix::observed_count() const {
  return static_cast<std::size_t>(mask_.sum());
}

MaskedMatrix MaskedMatrix::slots(Index first, Index count) const {
  if (first < 0 || count < 0 || first + count > cols()) {
    throw ShapeError("slot range out of bounds");
  }
  MaskedMatrix out;
  out.values_ = values_.middleCols(first, count);
  out.mask_ = mask_.middleCols(first, count);
  return out;
}

MaskedMatrix MaskedMatrix::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw ValueError("scale factor must be positive and finite");
  }
  MaskedMatrix out;
  out.values_ = values_ * factor;
  out.mask_ = mask_;
  return out;
}

MaskedMatrix MaskedMatrix::row_scaled(const Vector& factors) const {
  if (factors.size() != rows()) throw ShapeError("row factors must match rows");
  if (!(factors.array() > 0.0).all() || !factors.allFinite()) {
    throw ValueError("row scale factors must be positive and finite");
  }
  MaskedMatrix out;
  out.values_ = factors.asDiagonal() * values_;
  out.mask_ = mask_;
  return out;
}

double MaskedMatrix::mean_observed() const {
  const std::size_t n = observed_count();
  return n == 0 ? 0.0 : values_.sum() / static_cast<double>(n);
}

Vector MaskedMatrix::row_normalizers() const {
  Vector out = Vector::Ones(rows());
  for (Index r = 0; r < rows(); ++r) {
    const double n = mask_.row(r).sum();
    const double sum = values_.row(r).sum();
    if (n > 0.0 && sum > 0.0) out(r) = n / sum;
  }
  return out;
}

FactorPair::FactorPair(Matrix gains, Matrix activations)
    : gains_(std::move(gains)), activations_(std::move(activations)) {
  if (gains_.cols() != activations_.rows()) {
    throw ShapeError("gains " + dims(gains_) + " vs activations " +
                     dims(activations_));
  }
  require_nonnegative(gains_, "gains");
  require_nonnegative(activations_, "activations");
}

ReweightMatrix::ReweightMatrix(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.cols() < 2) {
    throw ShapeError("reweight matrix needs at least two columns");
  }
  require_nonnegative(weights_, "reweights");
  if (!weights_.col(0).isZero(0.0) ||
      !weights_.col(weights_.cols() - 1).isZero(0.0)) {
    throw ValueError("boundary reweight columns must be zero");
  }
}

void check_compatible(const MaskedMatrix& s, const Matrix& gains,
                      const Matrix& activations) {
  if (gains.rows() != s.rows() || activations.cols() != s.cols() ||
      gains.cols() != activations.rows()) {
    throw ShapeError("data " + std::to_string(s.rows()) + "x" +
                     std::to_string(s.cols()) + " vs gains " + dims(gains) +
                     " and activations " + dims(activations));
  }
}

Matrix masked_product_residual(const MaskedMatrix& s, const FactorPair& f) {
  check_compatible(s, f.gains(), f.activations());
  return s.values() - s.mask().cwiseProduct(f.gains() * f.activations());
}

Matrix reconstruct(const FactorPair& f) { return f.gains() * f.activations(); }

}  // namespace pcnmf
