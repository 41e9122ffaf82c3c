// Copyright 2026 The socnav Authors
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

#ifndef SOCNAV_RNG_HPP_
#define SOCNAV_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "socnav/common.hpp"

namespace socnav {

// Deterministic random stream. The uniform and normal transforms are spelled
// out here instead of using std::*_distribution so that sequences are
// bit-identical across standard libraries and platforms. All randomness in
// the toolkit flows through this type; every public sampler takes a seed or
// an Rng and is a pure function of it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), root_seed_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // The seed this stream was constructed with (recorded in artifacts).
  std::uint64_t root_seed() const { return root_seed_; }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Multiplicative range reduction; bias is negligible for the small n
    // used here (< 2^32).
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

  bool coin() { return (engine_() & 1ull) != 0; }

  // Standard normal via Box-Muller. Both values of each pair are used.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Normal truncated to [lo, hi] by rejection.
  double truncated_normal(double mean, double stddev, double lo, double hi) {
    for (;;) {
      const double v = normal(mean, stddev);
      if (v >= lo && v <= hi) return v;
    }
  }

  // Derives an independent child stream; used to decouple stages that share
  // a root seed.
  Rng fork(const std::string& tag) {
    return Rng(splitmix64(engine_() ^ fnv1a64(tag)));
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t root_seed_ = 0;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Named sub-stream seed derived from a root seed. Stage-level reproducibility:
// changing how one stage consumes randomness never shifts another stage.
inline std::uint64_t derive_seed(std::uint64_t root, const std::string& name) {
  return Rng::splitmix64(root ^ fnv1a64(name));
}

}  // namespace socnav

#endif  // SOCNAV_RNG_HPP_
