// Copyright 2026 The progsla Authors
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

#include <cstdint>
#include <random>

namespace progsla {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based seed derivation: child seed `index` of `seed`.
///
/// Every stage, run, user and resample gets its own stream this way, so
/// results never depend on evaluation order or thread count.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(seed ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return derive_seed(derive_seed(seed, a), b);
}

/// Uniform draw in [0, 1) that is a pure function of its arguments.
constexpr double unit_draw(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return static_cast<double>(derive_seed(seed, a, b) >> 11) * 0x1.0p-53;
}

// Stage indices for fanning a pipeline master seed out to the stages.
enum class Stage : std::uint64_t {
  kGeotemporal = 1,
  kMigration = 2,
  kBootstrap = 3,
  kWorkloads = 4,
  kPopulation = 5,
  kSelection = 6,
  kSweep = 7,
};

constexpr std::uint64_t stage_seed(std::uint64_t master, Stage stage) noexcept {
  return derive_seed(master, static_cast<std::uint64_t>(stage));
}

}  // namespace progsla
