#pragma once

// Reproducible random number streams. A master seed plus a trajectory counter
// is hashed through splitmix64 into an independent substream, so parallel
// trajectory loops are deterministic regardless of scheduling.

#include <cmath>
#include <cstdint>
#include <random>

namespace dephmix {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Substream `index` of master seed `seed`; distinct indices give
  /// statistically independent engines.
  static RngStream substream(std::uint64_t seed, std::uint64_t index) {
    return RngStream(splitmix64(seed) ^ splitmix64(index * 0x9e3779b97f4a7c15ULL + 1));
  }

  /// Uniform on [0,1) with 53 random bits; implementation-independent.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (cached spare).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    while (u == 0.0) u = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double theta = 6.283185307179586476925286766559 * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Exponential with given rate.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dephmix
