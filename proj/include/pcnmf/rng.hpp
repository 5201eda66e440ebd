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

#ifndef PCNMF_RNG_HPP_
#define PCNMF_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pcnmf {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Order-sensitive hash of a seed and a list of counters. Used to give every
// (stream, index...) tuple its own generator, so results never depend on the
// order in which streams are consumed.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> counters) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t c : counters) h = mix64(h ^ mix64(c + 0x632BE59BD9B4E019ULL));
  return h;
}

inline Rng substream(std::uint64_t seed,
                     std::initializer_list<std::uint64_t> counters) {
  return Rng(derive_seed(seed, counters));
}

}  // namespace pcnmf

#endif  // PCNMF_RNG_HPP_
