#pragma once

#include <cstdint>
#include <random>

namespace junction {

// Deterministic random stream. Every stochastic operation takes one of these
// explicitly; independent consumers (spawning, sensing, planning) get separate
// streams so the draw count of one cannot shift the sequence of another.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(mix(seed, stream)) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal() { return normal_(engine_); }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform draw over [0, n); n must be >= 1.
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace junction
