#pragma once

// Seedable random source shared by every stochastic step (sampler, shuffles,
// splits, bootstrap). The engine is std::mt19937_64, whose output sequence is
// fixed by the C++ standard. All distributions are implemented here on top of
// the raw 64-bit stream rather than with <random> distributions, whose
// algorithms are implementation-defined, so results are identical across
// standard libraries.

#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace radlabel {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for sub-stream `stream` of a run seeded with `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return mix_seed(mix_seed(base) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  /// Unbiased integer in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    const std::uint64_t range = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// log of a Gamma(shape, 1) variate. Working in log space keeps very small
  /// shapes (Dirichlet concentrations far below 1) from underflowing to zero.
  double log_gamma_variate(double shape) {
    if (shape < 1.0) {
      // Gamma(a) = Gamma(a + 1) * U^(1/a)
      return log_gamma_variate(shape + 1.0) + std::log(uniform_open()) / shape;
    }
    // Marsaglia & Tsang
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return std::log(d * v);
    }
  }

  /// Symmetric Dirichlet(concentration) draw of dimension k.
  std::vector<double> dirichlet(std::size_t k, double concentration) {
    std::vector<double> logs(k);
    double hi = -std::numeric_limits<double>::infinity();
    for (auto& l : logs) {
      l = log_gamma_variate(concentration);
      hi = std::max(hi, l);
    }
    double total = 0.0;
    for (auto& l : logs) {
      l = std::exp(l - hi);
      total += l;
    }
    for (auto& l : logs) l /= total;
    return logs;
  }

  /// Draw from unnormalized non-negative weights whose sum is `total`.
  std::size_t categorical(std::span<const double> weights, double total) {
    const double target = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (target < acc) return i;
    }
    // rounding left target at the very top; return the last positive weight
    for (std::size_t i = weights.size(); i-- > 0;)
      if (weights[i] > 0.0) return i;
    return weights.size() - 1;
  }

  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    return categorical(weights, total);
  }

  /// Fisher-Yates shuffle.
  template <std::random_access_iterator It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = index(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace radlabel
