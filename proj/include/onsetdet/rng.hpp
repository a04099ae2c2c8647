// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

namespace onsetdet {

// Deterministic RNG used for every stochastic step in the pipeline.
// All draws are derived from splitmix64 so results do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; one value per call for reproducibility.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Index draw proportional to nonnegative weights; inverse-CDF walk.
  int discrete(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform01() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  // Fisher-Yates permutation of 0..n-1.
  std::vector<int> permutation(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = n - 1; i > 0; --i) {
      const int j = uniform_int(0, i);
      std::swap(idx[i], idx[j]);
    }
    return idx;
  }

 private:
  std::uint64_t state_;
};

// Stable seed derivation for independent sub-streams (folds, classes, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  Rng mix(seed ^ (0x632be59bd9b4e019ULL + stream * 0x9e3779b97f4a7c15ULL));
  return mix.next_u64();
}

// FNV-1a over raw bytes; used for config/dataset provenance hashes.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace onsetdet
