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

#ifndef PCNMF_ERRORS_HPP_
#define PCNMF_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcnmf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A value violates a documented invariant (negative data, bad config, ...).
class ValueError : public Error {
 public:
  using Error::Error;
};

// A gains column has zero norm, so the rescaling matrix is singular.
class DegenerateFactorError : public Error {
 public:
  DegenerateFactorError(std::size_t column)
      : Error("gains column " + std::to_string(column) + " has zero norm"),
        column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

// NaN or Inf appeared in an iterate.
class NumericFailure : public Error {
 public:
  NumericFailure(std::size_t iteration, const std::string& what)
      : Error("numeric failure at iteration " + std::to_string(iteration) +
              ": " + what),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// A metric was requested over an empty set (e.g. RMSE with nothing missing).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcnmf

#endif  // PCNMF_ERRORS_HPP_
