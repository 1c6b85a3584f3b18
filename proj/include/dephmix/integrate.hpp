#pragma once

// Numerical solvers for the dephasing-mixture family: the time-local master
// equation (RK4 on Bloch components, where the generator is diagonal), the
// memory-kernel Volterra equation (trapezoid history with exact handling of
// the delta term), the classical four-state Pauli master equation (matrix
// exponential), and the exact Hadamard-diagonalized propagator of the
// negative-rate classical equation.

#include "dephmix/analytic.hpp"
#include "dephmix/core.hpp"
#include "dephmix/quadrature.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dephmix {

struct TimeGrid {
  double t0 = 0, t1 = 1;
  int steps = 1;

  TimeGrid() = default;
  TimeGrid(double a, double b, int n) : t0(a), t1(b), steps(n) {
    detail::require(t0 >= 0.0 && t1 > t0, "grid requires t1 > t0 >= 0");
    detail::require(steps >= 1, "grid requires at least one step");
  }

  double h() const { return (t1 - t0) / steps; }
  double time(int i) const { return t0 + i * h(); }
  int size() const { return steps + 1; }
};

/// Time-stamped sequence of states / channel probabilities from any
/// realisation, with provenance.
struct TrajectoryRecord {
  std::string method;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<PauliChannelProbs> probs;  // may be empty
};

using RateFn = std::function<RateDiagnostics(double)>;

inline RateFn mixture_rate_fn(const MixtureWeights& x) {
  return [x](double t) { return rates(x, t); };
}

/// Channel probabilities from numerical Bloch multipliers, clamping solver
/// round-off (negatives above -tol are set to zero and the vector is
/// renormalized; anything worse is an integration failure).
inline PauliChannelProbs probs_from_multipliers(const std::array<double, 3>& lam,
                                                double tol = 1e-6) {
  auto p = hadamard4_inv({1.0, lam[0], lam[1], lam[2]});
  double sum = 0.0;
  for (double& v : p) {
    if (v < -tol) throw std::logic_error("numerical multipliers left the channel simplex");
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  return PauliChannelProbs(p[0] / sum, p[1] / sum, p[2] / sum, p[3] / sum);
}

/// RK4 integration of the Bloch multipliers lambda_i' = -(gamma_j + gamma_k)
/// lambda_i from lambda(t0) = (1,1,1). The time-local equation is diagonal in
/// the Bloch representation, so these multipliers carry the whole map.
inline std::vector<std::array<double, 3>> solve_time_local_multipliers(const RateFn& rate_fn,
                                                                       const TimeGrid& grid) {
  auto decay = [&](double t) -> std::array<double, 3> {
    const RateDiagnostics r = rate_fn(t);
    for (double g : {r.gamma1, r.gamma2, r.gamma3})
      detail::require(std::isfinite(g), "rate function returned a non-finite value");
    return {-(r.gamma2 + r.gamma3), -(r.gamma3 + r.gamma1), -(r.gamma1 + r.gamma2)};
  };

  std::array<double, 3> lam = {1.0, 1.0, 1.0};
  const double h = grid.h();
  std::vector<std::array<double, 3>> out;
  out.reserve(grid.size());
  out.push_back(lam);
  for (int n = 0; n < grid.steps; ++n) {
    const double t = grid.time(n);
    const auto a1 = decay(t);
    const auto a2 = decay(t + 0.5 * h);
    const auto a4 = decay(t + h);
    for (int i = 0; i < 3; ++i) {
      const double k1 = a1[i] * lam[i];
      const double k2 = a2[i] * (lam[i] + 0.5 * h * k1);
      const double k3 = a2[i] * (lam[i] + 0.5 * h * k2);
      const double k4 = a4[i] * (lam[i] + h * k3);
      lam[i] += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out.push_back(lam);
  }
  return out;
}

namespace detail {

inline TrajectoryRecord record_from_multipliers(const std::string& method,
                                                const std::vector<std::array<double, 3>>& lams,
                                                const DensityMatrix& rho0,
                                                const TimeGrid& grid) {
  const BlochVector b0 = to_bloch(rho0);
  TrajectoryRecord rec;
  rec.method = method;
  rec.times.reserve(grid.size());
  for (int m = 0; m < grid.size(); ++m) {
    const auto& l = lams[m];
    rec.times.push_back(grid.time(m));
    rec.states.push_back(
        from_bloch(BlochVector(l[0] * b0.b1, l[1] * b0.b2, l[2] * b0.b3)));
    rec.probs.push_back(probs_from_multipliers(l));
  }
  return rec;
}

}  // namespace detail

/// Integrate rho' = (1/2) sum_k gamma_k(t) (sigma_k rho sigma_k - rho) by
/// classical RK4 on the Bloch components, where the equation is diagonal:
/// b_i' = -(gamma_j + gamma_k) b_i. Trace and Hermiticity are preserved
/// exactly by construction.
inline TrajectoryRecord solve_time_local(const RateFn& rate_fn, const DensityMatrix& rho0,
                                         const TimeGrid& grid) {
  detail::require(rho0.dim() == 2, "time-local solver expects a qubit state");
  return detail::record_from_multipliers("time-local-rk4",
                                         solve_time_local_multipliers(rate_fn, grid), rho0,
                                         grid);
}

/// Bloch multipliers of the memory-kernel equation
/// lambda_i'(t) = -local_i lambda_i(t) + int_0^t g_i(t-s) lambda_i(s) ds,
/// solved with trapezoid quadrature of the history and an implicit
/// trapezoidal step (second order in h). History is stored densely.
inline std::vector<std::array<double, 3>> solve_volterra_multipliers(
    const KernelComponents& kernel, const TimeGrid& grid) {
  detail::require(grid.t0 == 0.0, "memory kernel starts at t = 0");
  const int n = grid.steps;
  const double h = grid.h();

  std::array<std::vector<double>, 3> comp;
  for (int i = 0; i < 3; ++i) {
    const double a = -kernel.local_coeff(i);
    std::vector<double> g(n + 1);  // history kernel at multiples of h
    for (int m = 0; m <= n; ++m) g[m] = kernel.history(i, m * h);

    std::vector<double> b(n + 1, 0.0);
    b[0] = 1.0;
    std::vector<double> f(n + 1, 0.0);  // right-hand side values
    f[0] = a * b[0];
    for (int m = 0; m < n; ++m) {
      // trapezoid over history at t_{m+1}; the unknown endpoint b_{m+1}
      // enters linearly with weight h*g(0)/2, solved for in closed form
      double known = 0.5 * g[m + 1] * b[0];
      for (int j = 1; j <= m; ++j) known += g[m + 1 - j] * b[j];
      known *= h;
      const double c = a + 0.5 * h * g[0];
      const double rhs = b[m] + 0.5 * h * (f[m] + known);
      b[m + 1] = rhs / (1.0 - 0.5 * h * c);
      f[m + 1] = c * b[m + 1] + known;
    }
    comp[i] = std::move(b);
  }

  std::vector<std::array<double, 3>> out(n + 1);
  for (int m = 0; m <= n; ++m) out[m] = {comp[0][m], comp[1][m], comp[2][m]};
  return out;
}

/// Solve rho'(t) = int_0^t K(t-s) rho(s) ds for a qubit initial state.
inline TrajectoryRecord solve_volterra(const KernelComponents& kernel, const DensityMatrix& rho0,
                                       const TimeGrid& grid) {
  detail::require(rho0.dim() == 2, "Volterra solver expects a qubit state");
  return detail::record_from_multipliers("volterra-trapezoid",
                                         solve_volterra_multipliers(kernel, grid), rho0, grid);
}

/// Generator of the classical four-state Pauli master equation with rates
/// 0 -> k at x_k and k -> 0 at 1.
inline Eigen::Matrix4d classical_generator(const MixtureWeights& x) {
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  a(0, 0) = -1.0;
  for (int k = 1; k <= 3; ++k) {
    a(0, k) = 1.0;
    a(k, 0) = x[k - 1];
    a(k, k) = -1.0;
  }
  return a;
}

/// Exact solution of the classical Pauli master equation by matrix
/// exponential of the fixed 4x4 generator.
inline std::array<double, 4> solve_classical_markov(const MixtureWeights& x,
                                                    const std::array<double, 4>& p0, double t) {
  detail::require(t >= 0.0, "time must be nonnegative");
  double sum = 0.0;
  for (double p : p0) {
    detail::require(p >= -1e-12, "initial probabilities must be nonnegative");
    sum += p;
  }
  detail::require(std::abs(sum - 1.0) <= 1e-9, "initial probabilities must sum to one");
  const Eigen::Matrix4d expm = (t * classical_generator(x)).exp();
  Eigen::Vector4d v(p0[0], p0[1], p0[2], p0[3]);
  Eigen::Vector4d out = expm * v;
  return {out[0], out[1], out[2], out[3]};
}

/// Propagator T(t) of the probability 4-vector equation
/// dP/dt = (1/2) G(gamma(t)) P. The generator family commutes at all times
/// and is simultaneously diagonalized by the 4-point Hadamard transform
/// (Klein four-group structure), so
///   T(t) = (1/4) H diag(1, e^{-G2-G3}, e^{-G1-G3}, e^{-G1-G2}) H
/// with G_k = int_0^t gamma_k. The integrals use adaptive Simpson to 1e-10.
inline Eigen::Matrix4d classical_propagator(const RateFn& rate_fn, double t) {
  detail::require(t >= 0.0, "time must be nonnegative");
  std::array<double, 3> big_gamma{};
  for (int k = 0; k < 3; ++k) {
    big_gamma[k] = integrate(
        [&](double u) {
          const double g = rate_fn(u).gamma(k);
          detail::require(std::isfinite(g), "rate function returned a non-finite value");
          return g;
        },
        0.0, t, 1e-10);
  }
  Eigen::Matrix4d hadamard;
  hadamard << 1, 1, 1, 1, 1, 1, -1, -1, 1, -1, 1, -1, 1, -1, -1, 1;
  Eigen::Vector4d diag(1.0, std::exp(-big_gamma[1] - big_gamma[2]),
                       std::exp(-big_gamma[0] - big_gamma[2]),
                       std::exp(-big_gamma[0] - big_gamma[1]));
  return 0.25 * hadamard * diag.asDiagonal() * hadamard;
}

/// Trajectory of channel probabilities and states under the negative-rate
/// classical propagator from P(0) = (1,0,0,0), mapped back to the qubit.
inline TrajectoryRecord propagator_trajectory(const MixtureWeights& x, const DensityMatrix& rho0,
                                              const TimeGrid& grid) {
  TrajectoryRecord rec;
  rec.method = "classical-propagator";
  const RateFn fn = mixture_rate_fn(x);
  for (int m = 0; m < grid.size(); ++m) {
    const double t = grid.time(m);
    const Eigen::Matrix4d prop = classical_propagator(fn, t);
    Eigen::Vector4d p = prop * Eigen::Vector4d(1, 0, 0, 0);
    PauliChannelProbs probs(p[0], p[1], p[2], p[3]);
    rec.times.push_back(t);
    rec.probs.push_back(probs);
    rec.states.push_back(apply_pauli_channel(probs, rho0));
  }
  return rec;
}

/// Analytic trajectory on a grid (reference for cross-method comparisons).
inline TrajectoryRecord analytic_trajectory(const MixtureWeights& x, const DensityMatrix& rho0,
                                            const TimeGrid& grid) {
  TrajectoryRecord rec;
  rec.method = "analytic";
  for (int m = 0; m < grid.size(); ++m) {
    const double t = grid.time(m);
    const PauliChannelProbs p = channel_probs(x, t);
    rec.times.push_back(t);
    rec.probs.push_back(p);
    rec.states.push_back(apply_pauli_channel(p, rho0));
  }
  return rec;
}

}  // namespace dephmix
