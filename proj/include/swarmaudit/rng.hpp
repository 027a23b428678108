#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "swarmaudit/errors.hpp"

namespace swarmaudit {

// splitmix64; used to derive independent sub-seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named sub-streams of a scenario seed. Every component draws from its own
// derived seed so runs stay reproducible independent of evaluation order.
enum class SeedDomain : std::uint64_t {
  kData = 1,
  kPartition = 2,
  kProtocol = 3,
  kAttack = 4,
  kEval = 5,
  kSplit = 6,
  kClientBase = 1000,
};

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return splitmix64(master ^ splitmix64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t master, SeedDomain domain) {
  return derive_seed(master, static_cast<std::uint64_t>(domain));
}

inline std::uint64_t client_seed(std::uint64_t master, int client_id) {
  return derive_seed(master, static_cast<std::uint64_t>(SeedDomain::kClientBase) +
                                 static_cast<std::uint64_t>(client_id));
}

// Deterministic RNG. mt19937_64 output is pinned by the standard; the
// distribution transforms below are written out explicitly because the
// std::*_distribution classes are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw ArgumentError("uniform_int: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller (cosine branch), two draws per call.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Gamma(shape, 1). Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
  double gamma(double shape) {
    if (shape <= 0.0) throw ArgumentError("gamma: shape must be positive");
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(std::max(u, 1e-300), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Dirichlet(alpha * 1_k) proportions.
  std::vector<double> dirichlet(double alpha, std::size_t k) {
    std::vector<double> p(k);
    double sum = 0.0;
    for (auto& v : p) {
      v = gamma(alpha);
      sum += v;
    }
    if (sum <= 0.0) {  // all-zero draws are possible only for degenerate alpha
      std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(k));
      return p;
    }
    for (auto& v : p) v /= sum;
    return p;
  }

  // Index into `cum_probs` (cumulative, last entry ~1) for one categorical draw.
  std::size_t categorical(const std::vector<double>& cum_probs) {
    const double u = uniform();
    auto it = std::upper_bound(cum_probs.begin(), cum_probs.end(), u);
    if (it == cum_probs.end()) return cum_probs.size() - 1;
    return static_cast<std::size_t>(it - cum_probs.begin());
  }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = uniform_int(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace swarmaudit
