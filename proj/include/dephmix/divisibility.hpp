#pragma once

// Markovianity classifiers for the dephasing-mixture family: CPT, CP- and
// P-divisibility, BLP monotonicity, the geometric (rate-sum) criterion,
// intermediate-map Choi tests and the two-qubit P-divisibility witness
// search.

#include "dephmix/analytic.hpp"
#include "dephmix/core.hpp"
#include "dephmix/integrate.hpp"
#include "dephmix/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dephmix {

constexpr double kRateNegTol = 1e-10;  // absorbs round-off at gamma = 0 boundaries

/// Per-time divisibility flags over a grid.
struct DivisibilityReport {
  TimeGrid grid;
  std::vector<bool> cpt;
  std::vector<bool> cp_divisible;
  std::vector<bool> p_divisible;
  std::vector<bool> blp_monotone;
  std::vector<bool> geometric_markov;
  std::optional<std::pair<int, double>> first_negative_rate;  // (rate index, time)
};

/// Random qubit states for BLP sampling: uniform pure (sphere surface) or
/// mixed (uniform in the ball).
inline DensityMatrix random_state(RngStream& rng, bool pure) {
  const double z = 2.0 * rng.uniform() - 1.0;
  const double phi = 6.283185307179586476925286766559 * rng.uniform();
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  double r = 1.0;
  if (!pure) r = std::cbrt(rng.uniform());
  return from_bloch(BlochVector(r * s * std::cos(phi), r * s * std::sin(phi), r * z));
}

/// d/dt || Lambda_t[rho1 - rho2] ||_1 by central finite difference (h = 1e-6)
/// under the analytic map.
inline double blp_derivative(const MixtureWeights& x, const DensityMatrix& rho1,
                             const DensityMatrix& rho2, double t) {
  detail::require(t >= 0.0, "time must be nonnegative");
  detail::require(trace_norm(rho1.mat() - rho2.mat()) > 1e-14,
                  "BLP derivative requires distinct states");
  const ComplexMatrix delta = rho1.mat() - rho2.mat();
  auto norm_at = [&](double u) {
    const PauliChannelProbs p = channel_probs(x, u);
    ComplexMatrix out = ComplexMatrix::Zero(2, 2);
    for (int j = 0; j < 4; ++j) out += p[j] * pauli(j) * delta * pauli(j);
    return trace_norm(out);
  };
  const double h = 1e-6;
  if (t >= h) return (norm_at(t + h) - norm_at(t - h)) / (2.0 * h);
  return (norm_at(t + h) - norm_at(t)) / h;
}

/// Intermediate map Lambda_{t,s} of the mixture family: Pauli-diagonal with
/// multipliers xi_k = lambda_k(t)/lambda_k(s). Positive iff all |xi_k| <= 1;
/// completely positive iff the Choi weights (1/4) H (1, xi1, xi2, xi3) are
/// all nonnegative.
struct IntermediateMap {
  double s = 0, t = 0;
  std::array<double, 3> xi{};
  std::array<double, 4> choi_weights{};
  bool cp = false;
  bool positive = false;
};

inline IntermediateMap intermediate_map(const MixtureWeights& x, double s, double t) {
  detail::require(0.0 <= s && s < t, "intermediate map requires 0 <= s < t");
  const LambdaTriple ls = lambdas(x, s), lt = lambdas(x, t);
  IntermediateMap m;
  m.s = s;
  m.t = t;
  for (int k = 0; k < 3; ++k) {
    detail::require(ls[k] != 0.0, "lambda(s) vanished");  // cannot occur at finite s
    m.xi[k] = lt[k] / ls[k];
  }
  m.choi_weights = hadamard4_inv({1.0, m.xi[0], m.xi[1], m.xi[2]});
  m.cp = true;
  for (double w : m.choi_weights) m.cp = m.cp && w >= -1e-12;
  m.positive = std::abs(m.xi[0]) <= 1.0 + 1e-12 && std::abs(m.xi[1]) <= 1.0 + 1e-12 &&
               std::abs(m.xi[2]) <= 1.0 + 1e-12;
  return m;
}

/// Classify the dynamics over a time grid. CP-divisibility is read off the
/// rate signs, P-divisibility from the pairwise rate sums, BLP monotonicity
/// from finite-difference derivatives on sampled state pairs, and the
/// geometric criterion from gamma0 > 0.
inline DivisibilityReport classify(const MixtureWeights& x, const TimeGrid& grid,
                                   int blp_pairs = 16, std::uint64_t seed = 20230901) {
  DivisibilityReport rep;
  rep.grid = grid;

  std::vector<std::pair<DensityMatrix, DensityMatrix>> pairs;
  RngStream rng(seed);
  for (int i = 0; i < blp_pairs; ++i) {
    const bool pure = i % 2 == 0;
    DensityMatrix a = random_state(rng, pure);
    DensityMatrix b = random_state(rng, !pure);
    if (trace_norm(a.mat() - b.mat()) < 1e-6) b = from_bloch(BlochVector(0, 0, 0.5));
    pairs.emplace_back(std::move(a), std::move(b));
  }

  for (int m = 0; m < grid.size(); ++m) {
    const double t = grid.time(m);
    const RateDiagnostics r = rates(x, t);
    rep.cpt.push_back(cpt_holds(lambdas(x, t)));
    const bool cp = r.gamma1 >= -kRateNegTol && r.gamma2 >= -kRateNegTol &&
                    r.gamma3 >= -kRateNegTol;
    rep.cp_divisible.push_back(cp);
    rep.p_divisible.push_back(r.gamma1 + r.gamma2 >= -kRateNegTol &&
                              r.gamma2 + r.gamma3 >= -kRateNegTol &&
                              r.gamma3 + r.gamma1 >= -kRateNegTol);
    bool blp = true;
    for (const auto& [a, b] : pairs)
      blp = blp && blp_derivative(x, a, b, t) <= 1e-8;
    rep.blp_monotone.push_back(blp);
    rep.geometric_markov.push_back(r.gamma0 > 0.0);
    if (!cp && !rep.first_negative_rate) {
      int idx = 0;
      double worst = r.gamma1;
      if (r.gamma2 < worst) worst = r.gamma2, idx = 1;
      if (r.gamma3 < worst) worst = r.gamma3, idx = 2;
      rep.first_negative_rate = std::make_pair(idx, t);
    }
  }
  return rep;
}

/// Result of the two-qubit P-divisibility witness search.
struct TwoQubitViolation {
  bool found = false;
  double max_derivative = 0;
  double s = 0, t = 0;
  std::string witness_kind;
  ComplexMatrix witness;  // 4x4 Hermitian
};

namespace detail {

inline ComplexMatrix apply_intermediate_ext(const std::array<double, 4>& w,
                                            const ComplexMatrix& x4) {
  ComplexMatrix out = ComplexMatrix::Zero(4, 4);
  const ComplexMatrix id2 = pauli(0);
  for (int j = 0; j < 4; ++j) {
    const ComplexMatrix pj = kron(pauli(j), id2);
    out += w[j] * pj * x4 * pj;
  }
  return out;
}

inline double ext_norm_derivative(const MixtureWeights& x, double s, double t,
                                  const ComplexMatrix& witness, double h = 1e-6) {
  auto norm_at = [&](double u) {
    const IntermediateMap m = intermediate_map(x, s, u);
    return trace_norm(apply_intermediate_ext(m.choi_weights, witness));
  };
  return (norm_at(t + h) - norm_at(t - h)) / (2.0 * h);
}

inline ComplexVector maximally_entangled(RngStream& rng) {
  // (U (x) 1)|phi+> for a Haar-ish random 2x2 unitary U
  Eigen::Matrix2cd a;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = Complex(rng.normal(), rng.normal());
  const Eigen::HouseholderQR<Eigen::Matrix2cd> qr(a);
  Eigen::Matrix2cd q = qr.householderQ();
  ComplexVector v = ComplexVector::Zero(4);
  const double inv_sqrt2 = 0.7071067811865475244;
  // |phi+> = (|00> + |11>)/sqrt2; indices 0 and 3
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) v[i * 2 + k] += inv_sqrt2 * q(i, k);
  return v;
}

}  // namespace detail

/// Search for a Hermitian witness X on C^4 with d/dt ||(Lambda_{t,s} (x) id)[X]||_1 > 0.
/// The family contains the maximally entangled (Choi) state, differences of
/// random maximally entangled states, and random Hermitian samples both
/// traceless and trace-carrying; the search is seeded and deterministic, with
/// one local refinement pass around the best grid cell.
inline TwoQubitViolation two_qubit_violation(const MixtureWeights& x,
                                             const std::vector<double>& s_grid,
                                             const std::vector<double>& t_grid,
                                             std::uint64_t seed = 7, int n_random = 24) {
  RngStream rng(seed);

  std::vector<std::pair<std::string, ComplexMatrix>> witnesses;
  {
    ComplexVector phi = ComplexVector::Zero(4);
    phi[0] = phi[3] = 0.7071067811865475244;
    witnesses.emplace_back("choi-state", phi * phi.adjoint());
  }
  for (int i = 0; i < n_random / 3; ++i) {
    const ComplexVector a = detail::maximally_entangled(rng);
    const ComplexVector b = detail::maximally_entangled(rng);
    witnesses.emplace_back("maxent-difference",
                           a * a.adjoint() - b * b.adjoint());
  }
  for (int i = 0; i < n_random; ++i) {
    ComplexMatrix a(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) a(r, c) = Complex(rng.normal(), rng.normal());
    ComplexMatrix h = a + a.adjoint();
    if (i % 2 == 0) h -= (h.trace() / 4.0) * ComplexMatrix::Identity(4, 4);
    witnesses.emplace_back(i % 2 == 0 ? "random-traceless" : "random-hermitian", h);
  }

  TwoQubitViolation best;
  best.max_derivative = -std::numeric_limits<double>::infinity();
  auto consider = [&](double s, double t, const std::string& kind, const ComplexMatrix& w) {
    if (!(s >= 0.0 && t > s)) return;
    const double d = detail::ext_norm_derivative(x, s, t, w);
    if (d > best.max_derivative) {
      best.max_derivative = d;
      best.s = s;
      best.t = t;
      best.witness_kind = kind;
      best.witness = w;
    }
  };

  for (double s : s_grid)
    for (double t : t_grid)
      for (const auto& [kind, w] : witnesses) consider(s, t, kind, w);

  // local refinement around the best cell
  if (std::isfinite(best.max_derivative)) {
    const ComplexMatrix w = best.witness;
    const std::string kind = best.witness_kind;
    double ds = 0.1 * std::max(1e-3, best.s), dt = 0.1 * std::max(1e-3, best.t - best.s);
    for (int pass = 0; pass < 3; ++pass) {
      const double s0 = best.s, t0 = best.t;
      for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j) consider(s0 + i * ds, t0 + j * dt, kind, w);
      ds *= 0.5;
      dt *= 0.5;
    }
  }

  best.found = best.max_derivative > 1e-7;
  return best;
}

}  // namespace dephmix
