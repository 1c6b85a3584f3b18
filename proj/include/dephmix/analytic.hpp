#pragma once

// Closed forms for the mixture-of-dephasing-semigroups family
//
//   Lambda_t = x1 e^{t L1} + x2 e^{t L2} + x3 e^{t L3},
//   L_k[rho] = sigma_k rho sigma_k - rho,
//
// in units where a single dephasing semigroup damps coherences by e^{-2t}:
// Bloch multipliers, channel probabilities, canonical decoherence rates, the
// memory-kernel components and the eternal-negative-rate special case.

#include "dephmix/core.hpp"

#include <array>
#include <cmath>
#include <optional>

namespace dephmix {

/// Bloch multipliers lambda_k(t) of the dynamical map at one time.
struct LambdaTriple {
  double t = 0;
  double l1 = 1, l2 = 1, l3 = 1;

  double operator[](int k) const {
    switch (k) {
      case 0: return l1;
      case 1: return l2;
      case 2: return l3;
    }
    throw std::out_of_range("LambdaTriple index");
  }
};

/// Canonical rates gamma_k(t) of the time-local master equation
/// rho' = (1/2) sum_k gamma_k (sigma_k rho sigma_k - rho), together with the
/// log-derivative helpers mu_k = (1/2) d ln lambda_k / dt and their sum.
struct RateDiagnostics {
  double t = 0;
  double mu1 = 0, mu2 = 0, mu3 = 0;
  double gamma1 = 0, gamma2 = 0, gamma3 = 0;
  double gamma0 = 0;  // gamma1 + gamma2 + gamma3

  double mu(int k) const {
    switch (k) {
      case 0: return mu1;
      case 1: return mu2;
      case 2: return mu3;
    }
    throw std::out_of_range("RateDiagnostics index");
  }
  double gamma(int k) const {
    switch (k) {
      case 0: return gamma1;
      case 1: return gamma2;
      case 2: return gamma3;
    }
    throw std::out_of_range("RateDiagnostics index");
  }
};

/// lambda_k(t) = x_k + (1 - x_k) e^{-2t}.
inline LambdaTriple lambdas(const MixtureWeights& x, double t) {
  detail::require(t >= 0.0, "time must be nonnegative");
  const double e = std::exp(-2.0 * t);
  return {t, x.x1 + (1.0 - x.x1) * e, x.x2 + (1.0 - x.x2) * e, x.x3 + (1.0 - x.x3) * e};
}

/// p0 = (1 + e^{-2t})/2, p_k = x_k (1 - e^{-2t})/2.
inline PauliChannelProbs channel_probs(const MixtureWeights& x, double t) {
  detail::require(t >= 0.0, "time must be nonnegative");
  const double e = std::exp(-2.0 * t);
  return PauliChannelProbs(0.5 * (1.0 + e), 0.5 * x.x1 * (1.0 - e), 0.5 * x.x2 * (1.0 - e),
                           0.5 * x.x3 * (1.0 - e));
}

/// Exact mu_k and gamma_k at time t. The mu formulas are finite on the whole
/// closed simplex, including edges (x_k = 0 gives mu_k = -1) and vertices.
inline RateDiagnostics rates(const MixtureWeights& x, double t) {
  detail::require(t >= 0.0, "time must be nonnegative");
  const double e2t = std::exp(2.0 * t);
  RateDiagnostics r;
  r.t = t;
  r.mu1 = -(x.x2 + x.x3) / (x.x2 + x.x3 + e2t * x.x1);
  r.mu2 = -(x.x3 + x.x1) / (x.x3 + x.x1 + e2t * x.x2);
  r.mu3 = -(x.x1 + x.x2) / (x.x1 + x.x2 + e2t * x.x3);
  r.gamma1 = r.mu1 - r.mu2 - r.mu3;
  r.gamma2 = -r.mu1 + r.mu2 - r.mu3;
  r.gamma3 = -r.mu1 - r.mu2 + r.mu3;
  r.gamma0 = r.gamma1 + r.gamma2 + r.gamma3;
  return r;
}

/// Rescaled rates e^{2t} gamma_k(t). As t grows these tend to the finite
/// limits 1/x_j + 1/x_k - 1/x_i - 1 (interior points), so signs stay
/// resolvable long after the raw rates underflow.
inline std::array<double, 3> scaled_rates(const MixtureWeights& x, double t) {
  const double e2t = std::exp(2.0 * t);
  const std::array<double, 3> xs = {x.x1, x.x2, x.x3};
  std::array<double, 3> m{};  // e^{2t} mu_k
  for (int k = 0; k < 3; ++k) {
    const double rest = 1.0 - xs[k];
    m[k] = -e2t * rest / (rest + e2t * xs[k]);
  }
  return {m[0] - m[1] - m[2], -m[0] + m[1] - m[2], -m[0] - m[1] + m[2]};
}

/// Rates of the always-negative-rate master equation: gamma = (1, 1, -tanh t).
/// Identical to rates((1/2, 1/2, 0), t).
inline RateDiagnostics enm_rates(double t) {
  detail::require(t >= 0.0, "time must be nonnegative");
  RateDiagnostics r;
  r.t = t;
  const double e2t = std::exp(2.0 * t);
  r.mu1 = r.mu2 = -1.0 / (1.0 + e2t);
  r.mu3 = -1.0;
  r.gamma1 = r.gamma2 = 1.0;
  r.gamma3 = -std::tanh(t);
  r.gamma0 = 2.0 - std::tanh(t);
  return r;
}

/// Single-axis dephasing solution in Kraus form:
/// rho(t) = (1 + e^{-2t})/2 rho0 + (1 - e^{-2t})/2 sigma_n rho0 sigma_n.
inline DensityMatrix dephasing_solution(const DensityMatrix& rho0, const Eigen::Vector3d& axis,
                                        double t) {
  detail::require(t >= 0.0, "time must be nonnegative");
  const ComplexMatrix sn = pauli_along(axis);
  const double e = std::exp(-2.0 * t);
  return DensityMatrix(0.5 * (1.0 + e) * rho0.mat() + 0.5 * (1.0 - e) * sn * rho0.mat() * sn);
}

enum class KernelConvention { paper, rederived };

/// Components of the memory kernel
///   K(tau) rho = (1/2) sum_k K_k(tau) (sigma_k rho sigma_k - rho),
///   K_k(tau) = w_k delta(tau) + eta_k(tau),
/// with eta_1 = (X_1 - X_2 - X_3)/2 (and cyclic) built from exponentials
/// X_k(tau) = amp_k e^{-decay_k tau}.
///
/// Two conventions are exposed. `paper` keeps the printed formulas
/// (w_k = x_k, X_k = x_k (1-x_k) e^{-x_k tau}); its Volterra solution damps
/// coherences by e^{-t}, not the e^{-2t} of this family. `rederived` is the
/// transform-domain solution of definition
///   Khat_j + Khat_k = -(s lambdahat_i - 1)/lambdahat_i
/// for lambda_i(t) = x_i + (1-x_i) e^{-2t}, which gives w_k = 2 x_k and
/// X_k = 4 x_k (1-x_k) e^{-2 x_k tau} and reproduces the dynamics exactly.
struct KernelComponents {
  std::array<double, 3> loc_weights{};
  std::array<double, 3> amp{};
  std::array<double, 3> decay{};

  double X(int k, double t) const { return amp[k] * std::exp(-decay[k] * t); }

  double eta(int k, double t) const {
    const double s0 = X(0, t), s1 = X(1, t), s2 = X(2, t);
    switch (k) {
      case 0: return 0.5 * (s0 - s1 - s2);
      case 1: return 0.5 * (-s0 + s1 - s2);
      case 2: return 0.5 * (-s0 - s1 + s2);
    }
    throw std::out_of_range("KernelComponents index");
  }

  // Scalar kernel acting on Bloch component i: b_i'(t) =
  // -local_coeff(i) b_i(t) + int_0^t history(i, t-s) b_i(s) ds.
  double local_coeff(int i) const {
    return loc_weights[(i + 1) % 3] + loc_weights[(i + 2) % 3];
  }
  double history(int i, double tau) const {
    return -(eta((i + 1) % 3, tau) + eta((i + 2) % 3, tau));
  }
};

inline KernelComponents kernel_components(const MixtureWeights& x, KernelConvention conv) {
  const std::array<double, 3> xs = {x.x1, x.x2, x.x3};
  KernelComponents k;
  for (int i = 0; i < 3; ++i) {
    if (conv == KernelConvention::paper) {
      k.loc_weights[i] = xs[i];
      k.amp[i] = xs[i] * (1.0 - xs[i]);
      k.decay[i] = xs[i];
    } else {
      k.loc_weights[i] = 2.0 * xs[i];
      k.amp[i] = 4.0 * xs[i] * (1.0 - xs[i]);
      k.decay[i] = 2.0 * xs[i];
    }
  }
  return k;
}

/// Complete positivity of the map with Bloch multipliers lambda:
/// lambda_i + lambda_j <= 1 + lambda_k for all cyclic (i,j,k).
inline bool cpt_holds(const LambdaTriple& l) {
  const double tol = 1e-12;
  return l.l1 + l.l2 <= 1.0 + l.l3 + tol && l.l2 + l.l3 <= 1.0 + l.l1 + tol &&
         l.l3 + l.l1 <= 1.0 + l.l2 + tol;
}

}  // namespace dephmix
