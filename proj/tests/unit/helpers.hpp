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

// Random instances and scratch directories shared by the unit tests.

#ifndef PCNMF_TESTS_HELPERS_HPP_
#define PCNMF_TESTS_HELPERS_HPP_

#include <filesystem>
#include <random>
#include <string>

#include "pcnmf/specmat.hpp"

namespace testing {

using pcnmf::Index;
using pcnmf::Matrix;

inline Matrix uniform(Index rows, Index cols, std::mt19937_64& rng,
                      double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = d(rng);
  return m;
}

inline Matrix bernoulli_mask(Index rows, Index cols, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution b(p);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = b(rng) ? 1.0 : 0.0;
  return m;
}

inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::path(PCNMF_TEST_TMPDIR) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing

#endif  // PCNMF_TESTS_HELPERS_HPP_
