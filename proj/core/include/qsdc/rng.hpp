// Copyright 2026 The qsdc-sim Authors
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

#pragma once

// Counter-based seeding: every (seed, node, step, purpose) tuple owns an
// independent generator, so draws never depend on evaluation order.

#include <cstdint>
#include <random>

namespace qsdc::rng {

enum class Purpose : std::uint64_t {
  kTheta = 1,
  kSampleX = 2,
  kSampleY = 3,
  kSampleZ = 4,
  kMixing = 5,
  kEve = 6,
  kFuzz = 7,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t node,
                                   std::uint64_t step,
                                   Purpose purpose) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ node);
  h = splitmix64(h ^ step);
  return splitmix64(h ^ static_cast<std::uint64_t>(purpose));
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t node,
                                   std::uint64_t step, Purpose purpose) {
  return std::mt19937_64(stream_key(seed, node, step, purpose));
}

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementations.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace qsdc::rng
