#pragma once

// Extended-Hilbert-space representations with a "casual bystander" ancilla:
// the qubit (x) 3-level GKSL embedding whose reduced dynamics is the
// dephasing mixture while the ancilla state never moves, the analogous
// two-qubit (x) 3-level embedding, and the six-qubit orthogonal jump-state
// construction for two-qubit inputs.

#include "dephmix/analytic.hpp"
#include "dephmix/core.hpp"
#include "dephmix/integrate.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <vector>

namespace dephmix {

/// Quantum-classical state sum_i rho_i (x) |i><i| on C^d (x) C^3.
struct QuantumClassicalState {
  std::vector<ComplexMatrix> blocks;  // rho_i, one per classical label
  Eigen::Index system_dim = 2;

  ComplexMatrix full() const {
    const int n = static_cast<int>(blocks.size());
    ComplexMatrix out = ComplexMatrix::Zero(system_dim * n, system_dim * n);
    for (int i = 0; i < n; ++i) {
      ComplexMatrix p = ComplexMatrix::Zero(n, n);
      p(i, i) = 1.0;
      out += kron(blocks[i], p);
    }
    return out;
  }
};

namespace detail {

// Superoperator of L[rho] = sum_k S_k rho S_k - rho on column-major vec(rho).
inline ComplexMatrix gksl_superop(const std::vector<ComplexMatrix>& jumps) {
  const Eigen::Index d = jumps.front().rows();
  ComplexMatrix l = -ComplexMatrix::Identity(d * d, d * d);
  for (const auto& s : jumps) l += kron(s.transpose(), s);
  return l;
}

inline ComplexMatrix unvec(const ComplexVector& v, Eigen::Index d) {
  ComplexMatrix m(d, d);
  for (Eigen::Index j = 0; j < d; ++j) m.col(j) = v.segment(j * d, d);
  return m;
}

inline ComplexVector vec(const ComplexMatrix& m) {
  ComplexVector v(m.rows() * m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) v.segment(j * m.rows(), m.rows()) = m.col(j);
  return v;
}

}  // namespace detail

/// Bipartite generator on C^2 (x) C^3 with jump operators
/// S_k = sigma_k (x) |k><k|. Since sum_k S_k^dag S_k = 1, the compact form
/// L[rho] = sum_k S_k rho S_k - rho is exactly GKSL. The generator itself is
/// independent of the mixture weights; they enter through the frozen ancilla
/// state diag(x) of the product initial condition.
struct BipartiteGenerator {
  MixtureWeights x;
  std::vector<ComplexMatrix> jump_ops;  // sigma_k (x) P_k, k = 1..3
  ComplexMatrix superop;                // 36x36 on vec(rho)

  ComplexMatrix ancilla_state() const {
    ComplexMatrix e = ComplexMatrix::Zero(3, 3);
    e(0, 0) = x.x1;
    e(1, 1) = x.x2;
    e(2, 2) = x.x3;
    return e;
  }

  ComplexMatrix apply(const ComplexMatrix& rho) const {
    return detail::unvec(superop * detail::vec(rho), 6);
  }
};

inline BipartiteGenerator build_bipartite_generator(const MixtureWeights& x) {
  BipartiteGenerator g;
  g.x = x;
  for (int k = 1; k <= 3; ++k) {
    ComplexMatrix p = ComplexMatrix::Zero(3, 3);
    p(k - 1, k - 1) = 1.0;
    g.jump_ops.push_back(kron(pauli(k), p));
  }
  g.superop = detail::gksl_superop(g.jump_ops);
  return g;
}

/// Result of evolving the product state rho0 (x) diag(x) under the bipartite
/// GKSL generator for time t.
struct EmbeddedEvolution {
  DensityMatrix system;          // Tr_E of the evolved state
  ComplexMatrix ancilla;         // Tr_S of the evolved state (3x3)
  double ancilla_drift = 0;      // ||rho_E(t) - rho_E(0)||_1
  double ancilla_offdiag = 0;    // largest ancilla-off-diagonal block entry
  bool block_separable = false;  // quantum-classical structure preserved
};

inline EmbeddedEvolution evolve_embedded(const DensityMatrix& rho0, const MixtureWeights& x,
                                         double t) {
  detail::require(rho0.dim() == 2, "embedded evolution expects a qubit state");
  detail::require(t >= 0.0, "time must be nonnegative");
  const BipartiteGenerator gen = build_bipartite_generator(x);
  const ComplexMatrix rho_e0 = gen.ancilla_state();
  const ComplexMatrix init = kron(rho0.mat(), rho_e0);
  const ComplexMatrix propagated =
      detail::unvec(((t * gen.superop).exp() * detail::vec(init)).eval(), 6);

  EmbeddedEvolution out{DensityMatrix(partial_trace_matrix(propagated, {2, 3}, {0})),
                        partial_trace_matrix(propagated, {2, 3}, {1}), 0, 0, false};
  out.ancilla_drift = trace_norm(out.ancilla - rho_e0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      if (a == b) continue;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          out.ancilla_offdiag =
              std::max(out.ancilla_offdiag, std::abs(propagated(i * 3 + a, j * 3 + b)));
    }
  out.block_separable = out.ancilla_offdiag < 1e-12;
  return out;
}

/// Numerical Bloch multipliers of the embedded channel
/// rho -> Tr_E e^{tL}[rho (x) diag(x)], extracted by acting on the Pauli
/// basis. Agrees with lambdas(x, t) up to matrix-exponential round-off.
inline std::array<double, 3> embedded_multipliers(const MixtureWeights& x, double t) {
  const BipartiteGenerator gen = build_bipartite_generator(x);
  const ComplexMatrix expm = (t * gen.superop).exp();
  const ComplexMatrix rho_e = gen.ancilla_state();
  std::array<double, 3> lam{};
  for (int k = 1; k <= 3; ++k) {
    const ComplexMatrix mapped =
        detail::unvec((expm * detail::vec(kron(pauli(k), rho_e))).eval(), 6);
    const ComplexMatrix red = partial_trace_matrix(mapped, {2, 3}, {0});
    lam[k - 1] = 0.5 * (pauli(k) * red).trace().real();
  }
  return lam;
}

/// (Lambda_t (x) id) on a two-qubit state via the Kraus form
/// sum_j p_j(t) (sigma_j (x) 1) rho (sigma_j (x) 1).
inline DensityMatrix two_qubit_map_kraus(const DensityMatrix& rho_ab, const MixtureWeights& x,
                                         double t) {
  detail::require(rho_ab.dim() == 4, "two-qubit map expects a 4x4 state");
  const PauliChannelProbs p = channel_probs(x, t);
  const ComplexMatrix id2 = pauli(0);
  ComplexMatrix out = ComplexMatrix::Zero(4, 4);
  for (int j = 0; j < 4; ++j) {
    const ComplexMatrix op = kron(pauli(j), id2);
    out += p[j] * op * rho_ab.mat() * op;
  }
  return DensityMatrix(out);
}

/// Same map through the 12-dimensional GKSL embedding with jump operators
/// sigma_k (x) 1 (x) P_k and frozen ancilla diag(x).
inline DensityMatrix two_qubit_map_embedded(const DensityMatrix& rho_ab, const MixtureWeights& x,
                                            double t) {
  detail::require(rho_ab.dim() == 4, "two-qubit map expects a 4x4 state");
  const ComplexMatrix id2 = pauli(0);
  std::vector<ComplexMatrix> jumps;
  for (int k = 1; k <= 3; ++k) {
    ComplexMatrix p = ComplexMatrix::Zero(3, 3);
    p(k - 1, k - 1) = 1.0;
    jumps.push_back(kron(kron(pauli(k), id2), p));
  }
  ComplexMatrix rho_e = ComplexMatrix::Zero(3, 3);
  rho_e(0, 0) = x.x1;
  rho_e(1, 1) = x.x2;
  rho_e(2, 2) = x.x3;
  const ComplexMatrix l = detail::gksl_superop(jumps);
  const ComplexMatrix evolved =
      detail::unvec(((t * l).exp() * detail::vec(kron(rho_ab.mat(), rho_e))).eval(), 12);
  return DensityMatrix(partial_trace_matrix(evolved, {4, 3}, {0}));
}

/// Two-qubit extension: first qubit undergoes the mixture dynamics, second is
/// frozen. Computed through both the Kraus route and the 12-dim embedding,
/// which must agree within 1e-9.
inline DensityMatrix two_qubit_map(const DensityMatrix& rho_ab, const MixtureWeights& x,
                                   double t) {
  const DensityMatrix a = two_qubit_map_kraus(rho_ab, x, t);
  const DensityMatrix b = two_qubit_map_embedded(rho_ab, x, t);
  detail::require(trace_norm(a.mat() - b.mat()) <= 1e-9,
                  "Kraus and embedded two-qubit routes disagree");
  return a;
}

/// Four mutually orthonormal vectors in the six-qubit space
/// C^2 (x) C^2 (x) C^16 whose reduced A states are sigma_j rho_A sigma_j and
/// whose reduced B state is common to all four. |xi_0> purifies rho_AB into
/// the first four levels of C (eigendecomposition), and
/// |xi_j> = (sigma_j (x) 1 (x) V_j)|xi_0> with V_j the cyclic shift by 4j.
struct SixQubitJumpStates {
  std::array<ComplexVector, 4> vectors;
  double ortho_residual = 0;
  double ptrace_residual = 0;     // Tr_{B,C} |xi_j><xi_j| vs sigma_j rho_A sigma_j
  double b_state_residual = 0;    // spread of the reduced B states
  double constraint_residual = 0; // a_{ikmn} = sum_l c_{iml} c*_{knl}
  bool valid = false;
};

inline SixQubitJumpStates six_qubit_jump_states(const DensityMatrix& rho_ab) {
  detail::require(rho_ab.dim() == 4, "six-qubit construction expects a 4x4 state");
  SixQubitJumpStates out;

  // purification of rho_AB into C^16 (support on the first four levels)
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho_ab.mat());
  ComplexVector xi0 = ComplexVector::Zero(64);
  for (int l = 0; l < 4; ++l) {
    const double w = std::max(0.0, es.eigenvalues()[l]);
    if (w == 0.0) continue;
    const ComplexVector e = es.eigenvectors().col(l);
    for (int ab = 0; ab < 4; ++ab) xi0[ab * 16 + l] = std::sqrt(w) * e[ab];
  }
  out.vectors[0] = xi0;

  const ComplexMatrix id2 = pauli(0);
  for (int j = 1; j <= 3; ++j) {
    ComplexMatrix shift = ComplexMatrix::Zero(16, 16);
    for (int m = 0; m < 16; ++m) shift((m + 4 * j) % 16, m) = 1.0;
    out.vectors[j] = kron(kron(pauli(j), id2), shift) * xi0;
  }

  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const Complex dot = out.vectors[i].adjoint() * out.vectors[j];
      out.ortho_residual =
          std::max(out.ortho_residual, std::abs(dot - (i == j ? Complex(1) : Complex(0))));
    }

  const ComplexMatrix rho_a = partial_trace_matrix(rho_ab.mat(), {2, 2}, {0});
  const ComplexMatrix rho_b = partial_trace_matrix(rho_ab.mat(), {2, 2}, {1});
  for (int j = 0; j < 4; ++j) {
    const ComplexMatrix proj = out.vectors[j] * out.vectors[j].adjoint();
    const ComplexMatrix red_a = partial_trace_matrix(proj, {2, 2, 16}, {0});
    const ComplexMatrix expect = pauli(j) * rho_a * pauli(j);
    out.ptrace_residual = std::max(out.ptrace_residual, trace_norm(red_a - expect));
    const ComplexMatrix red_b = partial_trace_matrix(proj, {2, 2, 16}, {1});
    out.b_state_residual = std::max(out.b_state_residual, trace_norm(red_b - rho_b));
  }

  // coefficient constraint: rho_AB = Tr_C |xi_0><xi_0|
  const ComplexMatrix rec = partial_trace_matrix(xi0 * xi0.adjoint(), {4, 16}, {0});
  out.constraint_residual = (rec - rho_ab.mat()).cwiseAbs().maxCoeff();

  out.valid = out.ortho_residual <= 1e-12 && out.ptrace_residual <= 1e-10 &&
              out.b_state_residual <= 1e-10 && out.constraint_residual <= 1e-8;
  return out;
}

}  // namespace dephmix
