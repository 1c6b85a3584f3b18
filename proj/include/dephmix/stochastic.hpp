#pragma once

// Monte Carlo realisations of the dephasing mixture: white-noise random
// unitary trajectories, random dephasing directions, the classical jump
// process with rates 0->k at x_k and k->0 at 1, and the orthogonal-state
// realisation in the four-qubit (dim-16) space.

#include "dephmix/analytic.hpp"
#include "dephmix/core.hpp"
#include "dephmix/integrate.hpp"
#include "dephmix/quadrature.hpp"
#include "dephmix/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace dephmix {

enum class DirectionKind { discrete_axes, gaussian_anisotropic, uniform_sphere };

/// Distribution of the dephasing direction. Only the second moments
/// x_k = <n_k^2> of the distribution enter the averaged dynamics.
struct DirectionSpec {
  DirectionKind kind = DirectionKind::discrete_axes;
  MixtureWeights weights;  // implied (1/3,1/3,1/3) for uniform_sphere

  static DirectionSpec axes(const MixtureWeights& x) {
    return {DirectionKind::discrete_axes, x};
  }
  static DirectionSpec gaussian(const MixtureWeights& x) {
    return {DirectionKind::gaussian_anisotropic, x};
  }
  static DirectionSpec sphere() {
    return {DirectionKind::uniform_sphere, MixtureWeights(1.0 / 3, 1.0 / 3, 1.0 / 3)};
  }
};

namespace detail {

// Second moments of n = g/|g| for independent zero-mean normals g_k with
// variances v_k, via m_k(v) = int_0^inf v_k (1+2 v_k t)^{-3/2}
// prod_{j!=k} (1+2 v_j t)^{-1/2} dt, mapped to [0,1).
inline std::array<double, 3> normalized_gaussian_moments(const std::array<double, 3>& v) {
  std::array<double, 3> m{};
  for (int k = 0; k < 3; ++k) {
    if (v[k] == 0.0) {
      m[k] = 0.0;
      continue;
    }
    m[k] = integrate(
        [&](double u) {
          if (u >= 1.0) return 0.0;
          const double t = u / (1.0 - u);
          const double jac = 1.0 / ((1.0 - u) * (1.0 - u));
          double val = v[k] * std::pow(1.0 + 2.0 * v[k] * t, -1.5) * jac;
          for (int j = 0; j < 3; ++j)
            if (j != k && v[j] > 0.0) val /= std::sqrt(1.0 + 2.0 * v[j] * t);
          return val;
        },
        0.0, 1.0, 1e-13);
  }
  return m;
}

}  // namespace detail

/// Draws unit 3-vectors whose second moments match the spec weights. For the
/// gaussian kind the component variances are calibrated once at construction
/// (normalizing to unit length shifts the raw moments, so the variances are
/// solved for by fixed-point iteration on the moment map).
class DirectionSampler {
 public:
  explicit DirectionSampler(const DirectionSpec& spec) : spec_(spec) {
    if (spec.kind == DirectionKind::gaussian_anisotropic) calibrate();
  }

  Eigen::Vector3d operator()(RngStream& rng) const {
    switch (spec_.kind) {
      case DirectionKind::discrete_axes: {
        const double u = rng.uniform();
        const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
        int axis = 2;
        if (u < spec_.weights.x1)
          axis = 0;
        else if (u < spec_.weights.x1 + spec_.weights.x2)
          axis = 1;
        Eigen::Vector3d n = Eigen::Vector3d::Zero();
        n[axis] = sign;
        return n;
      }
      case DirectionKind::uniform_sphere: {
        const double z = 2.0 * rng.uniform() - 1.0;
        const double phi = 6.283185307179586476925286766559 * rng.uniform();
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        return {r * std::cos(phi), r * std::sin(phi), z};
      }
      case DirectionKind::gaussian_anisotropic: {
        Eigen::Vector3d g;
        for (int k = 0; k < 3; ++k) g[k] = variances_[k] > 0.0 ? std::sqrt(variances_[k]) * rng.normal() : 0.0;
        const double norm = g.norm();
        if (norm < 1e-300) return {1, 0, 0};  // essentially impossible
        return g / norm;
      }
    }
    throw std::logic_error("unknown direction kind");
  }

  const std::array<double, 3>& calibrated_variances() const { return variances_; }

 private:
  void calibrate() {
    const std::array<double, 3> target = {spec_.weights.x1, spec_.weights.x2, spec_.weights.x3};
    int nonzero = 0;
    for (double t : target) nonzero += t > 0.0;
    variances_ = target;
    if (nonzero <= 1) return;  // degenerate: n is a fixed axis
    for (int iter = 0; iter < 200; ++iter) {
      const auto m = detail::normalized_gaussian_moments(variances_);
      double err = 0.0;
      for (int k = 0; k < 3; ++k) err = std::max(err, std::abs(m[k] - target[k]));
      if (err < 1e-11) return;
      for (int k = 0; k < 3; ++k)
        if (target[k] > 0.0) variances_[k] *= target[k] / m[k];
      const double sum = variances_[0] + variances_[1] + variances_[2];
      for (auto& v : variances_) v /= sum;
    }
    throw std::runtime_error("direction moment calibration did not converge");
  }

  DirectionSpec spec_;
  std::array<double, 3> variances_{};
};

/// One-shot convenience draw. Construct a DirectionSampler directly when
/// drawing many samples from a gaussian-anisotropic spec.
inline Eigen::Vector3d sample_direction(const DirectionSpec& spec, RngStream& rng) {
  return DirectionSampler(spec)(rng);
}

enum class RuMode { exact_phase, pathwise };

struct RuEstimate {
  DensityMatrix state;
  std::array<double, 3> bloch_se{};  // per-component standard error
  double se = 0;                     // Euclidean standard error of the Bloch estimate
  PauliChannelProbs probs;           // empirical channel probabilities
  std::array<double, 4> probs_se{};
};

namespace detail {

inline Eigen::Vector3d rotate_bloch(const Eigen::Vector3d& b, const Eigen::Vector3d& n,
                                    double angle) {
  // conjugation by e^{-i phi n.sigma} rotates the Bloch vector by 2 phi
  const double c = std::cos(angle), s = std::sin(angle);
  return b * c + n.cross(b) * s + n * (n.dot(b)) * (1.0 - c);
}

}  // namespace detail

/// Random-unitary average over the white-noise dephasing dynamics. In
/// exact-phase mode the accumulated phase of one trajectory is sampled in one
/// shot, phi ~ Normal(0, t), and U = cos(phi) 1 - i sin(phi) sigma_n is
/// applied (the white-noise integral is Gaussian, so there is no
/// discretization error). Pathwise mode walks a grid of step `step` with an
/// Euler-Maruyama update per increment and first-order weak error.
///
/// Also accumulates the empirical channel probabilities p0 = <cos^2 phi>,
/// p_k = <sin^2 phi n_k^2>, an unbiased estimator of the Kraus weights.
inline RuEstimate ru_evolve(const DensityMatrix& rho0, double t, const DirectionSpec& spec,
                            std::size_t n_traj, std::uint64_t seed,
                            RuMode mode = RuMode::exact_phase, double step = 1e-3) {
  detail::require(rho0.dim() == 2, "random-unitary evolution expects a qubit state");
  detail::require(n_traj >= 1, "need at least one trajectory");
  detail::require(t >= 0.0, "time must be nonnegative");

  const DirectionSampler sampler(spec);
  const BlochVector b0v = to_bloch(rho0);
  const Eigen::Vector3d b0(b0v.b1, b0v.b2, b0v.b3);

  Eigen::Vector3d sum = Eigen::Vector3d::Zero(), sumsq = Eigen::Vector3d::Zero();
  std::array<double, 4> psum{}, psumsq{};

  const int n_steps = std::max(1, static_cast<int>(std::ceil(t / step)));
  const double h = t / n_steps;

  for (std::size_t i = 0; i < n_traj; ++i) {
    RngStream rng = RngStream::substream(seed, i);
    const Eigen::Vector3d n = sampler(rng);

    Eigen::Vector3d b;
    double phi = 0.0;
    if (mode == RuMode::exact_phase) {
      phi = std::sqrt(t) * rng.normal();
      b = detail::rotate_bloch(b0, n, 2.0 * phi);
    } else {
      b = b0;
      for (int s = 0; s < n_steps; ++s) {
        const double dw = std::sqrt(h) * rng.normal();
        phi += dw;
        const Eigen::Vector3d perp = b - n * n.dot(b);
        b += 2.0 * dw * n.cross(b) - 2.0 * h * perp;
      }
    }
    sum += b;
    sumsq += b.cwiseProduct(b);

    const double c2 = std::cos(phi) * std::cos(phi), s2 = 1.0 - c2;
    const std::array<double, 4> pt = {c2, s2 * n[0] * n[0], s2 * n[1] * n[1], s2 * n[2] * n[2]};
    for (int j = 0; j < 4; ++j) {
      psum[j] += pt[j];
      psumsq[j] += pt[j] * pt[j];
    }
  }

  const double inv = 1.0 / static_cast<double>(n_traj);
  const Eigen::Vector3d mean = sum * inv;

  RuEstimate est{from_bloch(BlochVector(mean[0], mean[1], mean[2])), {}, 0.0, {}, {}};
  double var_total = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double var = std::max(0.0, sumsq[k] * inv - mean[k] * mean[k]);
    est.bloch_se[k] = std::sqrt(var * inv);
    var_total += var * inv;
  }
  est.se = std::sqrt(var_total);

  std::array<double, 4> pmean{};
  for (int j = 0; j < 4; ++j) {
    pmean[j] = psum[j] * inv;
    const double var = std::max(0.0, psumsq[j] * inv - pmean[j] * pmean[j]);
    est.probs_se[j] = std::sqrt(var * inv);
  }
  est.probs = PauliChannelProbs(std::max(0.0, pmean[0]), std::max(0.0, pmean[1]),
                                std::max(0.0, pmean[2]), std::max(0.0, pmean[3]));
  return est;
}

/// One transition of the classical jump process; states are 0..3 and the only
/// allowed moves are 0 <-> k.
struct JumpEvent {
  double time = 0;
  int from_state = 0;
  int to_state = 0;
};

/// Exact stochastic simulation of the four-state chain starting in state 0:
/// holding time in 0 is exponential with total rate x1+x2+x3 = 1 and the
/// destination k is chosen with probability x_k; each k returns to 0 at rate 1.
inline std::vector<JumpEvent> gillespie(const MixtureWeights& x, double t_end, RngStream& rng) {
  detail::require(t_end > 0.0, "t_end must be positive");
  std::vector<JumpEvent> events;
  int state = 0;
  double t = 0.0;
  while (true) {
    t += rng.exponential(1.0);
    if (t >= t_end) break;
    if (state == 0) {
      const double u = rng.uniform();
      int dest = 3;
      if (u < x.x1)
        dest = 1;
      else if (u < x.x1 + x.x2)
        dest = 2;
      events.push_back({t, 0, dest});
      state = dest;
    } else {
      events.push_back({t, state, 0});
      state = 0;
    }
  }
  return events;
}

/// Classical state occupied at each grid time, for one realisation.
inline std::vector<int> jump_states_on_grid(const std::vector<JumpEvent>& events,
                                            const TimeGrid& grid) {
  std::vector<int> out(grid.size());
  std::size_t e = 0;
  int state = 0;
  for (int m = 0; m < grid.size(); ++m) {
    const double t = grid.time(m);
    while (e < events.size() && events[e].time <= t) {
      state = events[e].to_state;
      ++e;
    }
    out[m] = state;
  }
  return out;
}

/// Ensemble of classical jump trajectories carrying the quantum label
/// rho_k = sigma_k rho0 sigma_k. The ensemble average sum_k phat_k(t) rho_k
/// converges to the analytic solution as n_runs grows. Empirical occupation
/// probabilities are stored in the record.
inline TrajectoryRecord jump_ensemble(const MixtureWeights& x, const DensityMatrix& rho0,
                                      const TimeGrid& grid, std::size_t n_runs,
                                      std::uint64_t seed) {
  detail::require(rho0.dim() == 2, "jump ensemble expects a qubit state");
  detail::require(n_runs >= 1, "need at least one run");

  std::vector<std::array<std::size_t, 4>> counts(grid.size(), {0, 0, 0, 0});
  for (std::size_t r = 0; r < n_runs; ++r) {
    RngStream rng = RngStream::substream(seed, r);
    const auto events = gillespie(x, grid.t1 + grid.h(), rng);
    const auto states = jump_states_on_grid(events, grid);
    for (int m = 0; m < grid.size(); ++m) counts[m][states[m]]++;
  }

  TrajectoryRecord rec;
  rec.method = "jump-ensemble";
  rec.seed = seed;
  rec.samples = n_runs;
  const double inv = 1.0 / static_cast<double>(n_runs);
  for (int m = 0; m < grid.size(); ++m) {
    PauliChannelProbs p(counts[m][0] * inv, counts[m][1] * inv, counts[m][2] * inv,
                        counts[m][3] * inv);
    rec.times.push_back(grid.time(m));
    rec.probs.push_back(p);
    rec.states.push_back(apply_pauli_channel(p, rho0));
  }
  return rec;
}

/// Four mutually orthogonal vectors in the four-qubit space C^2 (x) C^8 whose
/// reduced system states are the sigma_k rho0 sigma_k. Built from the
/// eigendecomposition rho0 = p_a |phi_a><phi_a| + p_b |phi_b><phi_b| as
///   |Psi_0> = sqrt(p_a)|phi_a>|e_0> + sqrt(p_b)|phi_b>|e_1>,
///   |Psi_k> = (sigma_k (x) U_k)|Psi_0>,
/// with U_k the cyclic shift by 2k on the ancilla basis, so the four ancilla
/// supports are disjoint.
struct ExtendedJumpStates {
  std::array<ComplexVector, 4> vectors;
  double ortho_residual = 0;
  double ptrace_residual = 0;
  bool valid = false;
};

namespace detail {

inline ComplexMatrix ancilla_shift(int dim, int shift) {
  ComplexMatrix u = ComplexMatrix::Zero(dim, dim);
  for (int m = 0; m < dim; ++m) u((m + shift) % dim, m) = 1.0;
  return u;
}

// Eigenbasis of a qubit state; falls back to the computational basis when the
// spectrum is degenerate (any orthonormal eigenbasis is valid there).
inline void qubit_eigenbasis(const DensityMatrix& rho, Eigen::Vector2cd& v1, Eigen::Vector2cd& v2,
                             double& p1, double& p2) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho.mat());
  const double lo = es.eigenvalues()[0], hi = es.eigenvalues()[1];
  if (hi - lo < 1e-12) {
    v1 = Eigen::Vector2cd(1, 0);
    v2 = Eigen::Vector2cd(0, 1);
    p1 = p2 = 0.5;
    return;
  }
  p1 = std::max(0.0, hi);
  p2 = std::max(0.0, lo);
  v1 = es.eigenvectors().col(1);
  v2 = es.eigenvectors().col(0);
}

}  // namespace detail

inline ExtendedJumpStates extended_jump_states(const DensityMatrix& rho0) {
  detail::require(rho0.dim() == 2, "extended jump states are built from a qubit state");

  Eigen::Vector2cd phi1, phi2;
  double p1, p2;
  detail::qubit_eigenbasis(rho0, phi1, phi2, p1, p2);

  ExtendedJumpStates out;
  ComplexVector psi0 = ComplexVector::Zero(16);
  for (int s = 0; s < 2; ++s) {
    psi0[s * 8 + 0] = std::sqrt(p1) * phi1[s];
    psi0[s * 8 + 1] = std::sqrt(p2) * phi2[s];
  }
  out.vectors[0] = psi0;
  for (int k = 1; k <= 3; ++k) {
    const ComplexMatrix op = kron(pauli(k), detail::ancilla_shift(8, 2 * k));
    out.vectors[k] = op * psi0;
  }

  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const Complex dot = out.vectors[i].adjoint() * out.vectors[j];
      out.ortho_residual =
          std::max(out.ortho_residual, std::abs(dot - (i == j ? Complex(1) : Complex(0))));
    }
  for (int k = 0; k < 4; ++k) {
    const ComplexMatrix proj = out.vectors[k] * out.vectors[k].adjoint();
    const ComplexMatrix red = partial_trace_matrix(proj, {2, 8}, {0});
    const ComplexMatrix expect = pauli(k) * rho0.mat() * pauli(k);
    out.ptrace_residual = std::max(out.ptrace_residual, (red - expect).cwiseAbs().maxCoeff());
  }
  out.valid = out.ortho_residual <= 1e-12 && out.ptrace_residual <= 1e-10;
  return out;
}

/// Jump realisation in the dim-16 space: the classical chain of gillespie()
/// drives applications of sigma_k (x) U_k, and the ensemble average of the
/// reduced system state reproduces the dephasing-mixture dynamics.
inline TrajectoryRecord extended_jump_ensemble(const MixtureWeights& x, const DensityMatrix& rho0,
                                               const TimeGrid& grid, std::size_t n_runs,
                                               std::uint64_t seed) {
  const ExtendedJumpStates ext = extended_jump_states(rho0);
  detail::require(ext.valid, "extended jump state construction failed validity checks");

  std::array<ComplexMatrix, 4> jump_ops;
  for (int k = 1; k <= 3; ++k)
    jump_ops[k] = kron(pauli(k), detail::ancilla_shift(8, 2 * k));

  std::vector<ComplexMatrix> acc(grid.size(), ComplexMatrix::Zero(2, 2));
  for (std::size_t r = 0; r < n_runs; ++r) {
    RngStream rng = RngStream::substream(seed, r);
    const auto events = gillespie(x, grid.t1 + grid.h(), rng);
    ComplexVector cur = ext.vectors[0];
    std::size_t e = 0;
    for (int m = 0; m < grid.size(); ++m) {
      const double t = grid.time(m);
      while (e < events.size() && events[e].time <= t) {
        const int k = events[e].to_state != 0 ? events[e].to_state : events[e].from_state;
        cur = jump_ops[k] * cur;
        ++e;
      }
      // reduced state of the current vector: sum of 2-blocks over ancilla
      ComplexMatrix red = ComplexMatrix::Zero(2, 2);
      for (int a = 0; a < 8; ++a) {
        Eigen::Vector2cd block(cur[a], cur[8 + a]);
        red += block * block.adjoint();
      }
      acc[m] += red;
    }
  }

  TrajectoryRecord rec;
  rec.method = "extended-jump-ensemble";
  rec.seed = seed;
  rec.samples = n_runs;
  const double inv = 1.0 / static_cast<double>(n_runs);
  for (int m = 0; m < grid.size(); ++m) {
    rec.times.push_back(grid.time(m));
    rec.states.push_back(DensityMatrix(acc[m] * inv));
  }
  return rec;
}

}  // namespace dephmix
