#pragma once

// Parameter-triangle analysis: sign of the decoherence rates over the simplex
// of mixing weights, the closed-form classification of the asymptotic
// CP-divisible region, onset times of rate negativity, and the relative area
// of the non-CP-divisible parameter set (~0.87 of the triangle).

#include "dephmix/analytic.hpp"
#include "dephmix/core.hpp"
#include "dephmix/quadrature.hpp"
#include "dephmix/random.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dephmix {

enum class RegionStatus { all_nonneg, gamma1_negative, gamma2_negative, gamma3_negative };

inline std::string to_string(RegionStatus s) {
  switch (s) {
    case RegionStatus::all_nonneg: return "all-nonneg";
    case RegionStatus::gamma1_negative: return "gamma1-negative";
    case RegionStatus::gamma2_negative: return "gamma2-negative";
    case RegionStatus::gamma3_negative: return "gamma3-negative";
  }
  throw std::logic_error("unknown region status");
}

struct RegionCell {
  MixtureWeights x;
  RegionStatus status = RegionStatus::all_nonneg;
};

/// Classify the rate signs at one simplex point and time.
inline RegionStatus rate_sign_status(const MixtureWeights& x, double t) {
  const RateDiagnostics r = rates(x, t);
  int neg = -1;
  for (int k = 0; k < 3; ++k)
    if (r.gamma(k) < -1e-10) {
      if (neg >= 0) throw std::logic_error("more than one negative rate");
      neg = k;
    }
  switch (neg) {
    case -1: return RegionStatus::all_nonneg;
    case 0: return RegionStatus::gamma1_negative;
    case 1: return RegionStatus::gamma2_negative;
    case 2: return RegionStatus::gamma3_negative;
  }
  throw std::logic_error("unreachable");
}

/// Barycentric grid over the closed simplex (resolution n gives the points
/// (i,j,k)/n with i+j+k = n), each cell classified by the rate signs at t.
inline std::vector<RegionCell> region_grid(double t, int resolution) {
  detail::require(resolution >= 2, "resolution must be at least 2");
  detail::require(t >= 0.0, "time must be nonnegative");
  std::vector<RegionCell> cells;
  cells.reserve((resolution + 1) * (resolution + 2) / 2);
  const double inv = 1.0 / resolution;
  for (int i = 0; i <= resolution; ++i)
    for (int j = 0; j <= resolution - i; ++j) {
      const int k = resolution - i - j;
      // renormalize to absorb the 1/n round-off
      double x1 = i * inv, x2 = j * inv, x3 = k * inv;
      const double sum = x1 + x2 + x3;
      const MixtureWeights x(x1 / sum, x2 / sum, x3 / sum);
      cells.push_back({x, rate_sign_status(x, t)});
    }
  return cells;
}

/// True iff all three rates stay nonnegative for all times. For interior
/// points this is the closed-form condition 1/x_j + 1/x_k - 1/x_i >= 1 for
/// every cyclic (i,j,k) (the t -> infinity limit of e^{2t} gamma_i(t));
/// vertices are semigroups (true), edge points with exactly one x_k = 0 turn
/// negative immediately (false).
inline bool asymptotic_cp_divisible(const MixtureWeights& x) {
  const std::array<double, 3> xs = {x.x1, x.x2, x.x3};
  int zeros = 0;
  for (double v : xs) zeros += v == 0.0;
  if (zeros >= 2) return true;   // vertex
  if (zeros == 1) return false;  // edge interior
  for (int i = 0; i < 3; ++i) {
    const double lhs = 1.0 / xs[(i + 1) % 3] + 1.0 / xs[(i + 2) % 3] - 1.0 / xs[i];
    if (lhs < 1.0 - 1e-12) return false;
  }
  return true;
}

/// Index of the rate that eventually turns negative (at most one can).
inline std::optional<int> eventually_negative_rate(const MixtureWeights& x) {
  const std::array<double, 3> xs = {x.x1, x.x2, x.x3};
  int zeros = 0, zero_idx = -1;
  for (int k = 0; k < 3; ++k)
    if (xs[k] == 0.0) {
      ++zeros;
      zero_idx = k;
    }
  if (zeros >= 2) return std::nullopt;  // vertex semigroup
  if (zeros == 1) return zero_idx;      // edge: gamma_k of the vanishing weight
  for (int i = 0; i < 3; ++i) {
    const double lhs = 1.0 / xs[(i + 1) % 3] + 1.0 / xs[(i + 2) % 3] - 1.0 / xs[i];
    if (lhs < 1.0 - 1e-12) return i;
  }
  return std::nullopt;
}

/// Onset time t* of rate negativity: none when the point is asymptotically
/// CP-divisible, 0 for edge points (negative for all t > 0), otherwise the
/// unique root of the eventually-negative rate, found by bracketing plus
/// bisection on the rescaled rate e^{2t} gamma_k(t) to 1e-10.
inline std::optional<double> onset_time(const MixtureWeights& x) {
  const auto k = eventually_negative_rate(x);
  if (!k) return std::nullopt;
  const int i = *k;
  if (x[i] == 0.0) return 0.0;

  auto scaled = [&](double t) { return scaled_rates(x, t)[i]; };
  double lo = 0.0, hi = 1.0;
  while (scaled(hi) >= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw std::logic_error("failed to bracket rate sign change");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (scaled(mid) >= 0.0 ? lo : hi) = mid;
  }
  const double tstar = 0.5 * (lo + hi);
  for (double dt : {0.1, 1.0, 10.0})
    if (scaled(tstar + dt) >= 0.0)
      throw std::logic_error("rate recovered after its onset time");
  return tstar;
}

enum class AreaMethod { paper_quadrature, monte_carlo };

namespace detail {

// Printed 1-D integrand for the relative non-CP-divisible area, regularized
// against the inverse-square-root endpoint singularity by x = b - u^2 with
// b = sqrt(5) - 2.
inline double area_integral_printed() {
  const double b = std::sqrt(5.0) - 2.0;
  auto f = [](double x) {
    const double g = 4.0 * x / (1.0 - x * x);
    return 6.0 * (3.0 - 3.0 * x - 3.0 * x * x - x * x * x) * x /
           (std::sqrt(1.0 - g) * (1.0 - x * x) * (1.0 + x));
  };
  auto reg = [&](double u) {
    if (u == 0.0) {
      // limit: sqrt(1 - g(x)) ~ sqrt(g'(b)) u near x = b
      const double gp = 4.0 * (1.0 + b * b) / ((1.0 - b * b) * (1.0 - b * b));
      return 2.0 * 6.0 * (3.0 - 3.0 * b - 3.0 * b * b - b * b * b) * b /
             (std::sqrt(gp) * (1.0 - b * b) * (1.0 + b));
    }
    const double x = b - u * u;
    return f(x) * 2.0 * u;
  };
  return integrate(reg, 0.0, std::sqrt(b), 1e-12);
}

}  // namespace detail

/// Uniform point on the simplex via normalized exponential spacings.
inline MixtureWeights uniform_simplex_point(RngStream& rng) {
  const double e1 = rng.exponential(1.0), e2 = rng.exponential(1.0), e3 = rng.exponential(1.0);
  const double s = e1 + e2 + e3;
  return MixtureWeights(e1 / s, e2 / s, e3 / s);
}

/// Fraction of the parameter triangle whose dynamics is NOT asymptotically
/// CP-divisible (~0.87). `paper_quadrature` evaluates the printed 1-D
/// integral; `monte_carlo` averages the indicator over uniform simplex draws.
inline double area_fraction(AreaMethod method, std::size_t samples = 1000000,
                            std::uint64_t seed = 0) {
  if (method == AreaMethod::paper_quadrature) return detail::area_integral_printed();
  detail::require(samples >= 10000, "Monte Carlo area needs at least 1e4 samples");
  RngStream rng(seed);
  std::size_t outside = 0;
  for (std::size_t i = 0; i < samples; ++i)
    outside += !asymptotic_cp_divisible(uniform_simplex_point(rng));
  return static_cast<double>(outside) / static_cast<double>(samples);
}

/// Parametric samples of the asymptotic-region boundary. Along the branch
/// where the gamma_i condition is tight, write w = x_i and d = x_j - x_k;
/// then d^2 = (1-w)^2 (1 - 4y) with y = w/(1-w^2), i.e. the auxiliary pair
/// (w, y) lies on the cubic w^2 y + w - y = 0, and the boundary exists for
/// w in [0, sqrt(5)-2]. Emitted as plot data only.
struct BoundaryPoint {
  MixtureWeights x;
  int branch = 0;       // index i of the tight condition
  double cubic_x = 0;   // w
  double cubic_y = 0;   // y = w/(1-w^2)
};

inline std::vector<BoundaryPoint> newton_cubic_boundary(int samples_per_branch = 200) {
  detail::require(samples_per_branch >= 2, "need at least two samples per branch");
  const double b = std::sqrt(5.0) - 2.0;
  std::vector<BoundaryPoint> pts;
  for (int i = 0; i < 3; ++i) {
    for (int sign = -1; sign <= 1; sign += 2) {
      for (int m = 0; m < samples_per_branch; ++m) {
        const double w = b * m / (samples_per_branch - 1);
        const double y = w / (1.0 - w * w);
        const double d = sign * (1.0 - w) * std::sqrt(std::max(0.0, 1.0 - 4.0 * y));
        std::array<double, 3> xs{};
        xs[i] = w;
        xs[(i + 1) % 3] = 0.5 * (1.0 - w + d);
        xs[(i + 2) % 3] = 0.5 * (1.0 - w - d);
        pts.push_back({MixtureWeights(xs[0], xs[1], xs[2]), i, w, y});
      }
    }
  }
  return pts;
}

}  // namespace dephmix
