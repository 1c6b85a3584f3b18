#pragma once

// Dense complex linear algebra and the Pauli/Bloch data model shared by the
// rest of the library. Everything here is a pure value type; dimensions stay
// at desk scale (<= 64x64), so dense Eigen storage is used throughout.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace dephmix {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

constexpr double kHermTol = 1e-12;   // Hermiticity / trace tolerance
constexpr double kPsdTol = 1e-10;    // smallest-eigenvalue tolerance

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace detail

/// Pauli matrix sigma_j, j in {0,1,2,3} with sigma_0 = identity.
inline const ComplexMatrix& pauli(int j) {
  static const std::array<ComplexMatrix, 4> sigma = [] {
    std::array<ComplexMatrix, 4> s;
    for (auto& m : s) m = ComplexMatrix::Zero(2, 2);
    s[0] << 1, 0, 0, 1;
    s[1] << 0, 1, 1, 0;
    s[2] << 0, Complex(0, -1), Complex(0, 1), 0;
    s[3] << 1, 0, 0, -1;
    return s;
  }();
  if (j < 0 || j > 3) throw std::invalid_argument("pauli index out of range");
  return sigma[j];
}

/// sigma_n = n . sigma for a unit 3-vector n.
inline ComplexMatrix pauli_along(const Eigen::Vector3d& n) {
  detail::require(std::abs(n.norm() - 1.0) <= 1e-12, "axis must be a unit vector");
  return n[0] * pauli(1) + n[1] * pauli(2) + n[2] * pauli(3);
}

inline bool is_hermitian(const ComplexMatrix& m, double tol) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

struct BlochVector {
  double b1 = 0, b2 = 0, b3 = 0;

  double norm() const { return std::sqrt(b1 * b1 + b2 * b2 + b3 * b3); }

  BlochVector() = default;
  BlochVector(double x, double y, double z) : b1(x), b2(y), b3(z) {
    detail::require(b1 * b1 + b2 * b2 + b3 * b3 <= 1.0 + 1e-12,
                    "Bloch vector lies outside the unit ball");
  }
};

/// d x d density matrix: Hermitian, unit trace, positive semidefinite within
/// tolerance. The constructor symmetrizes (X + X^dag)/2 before validating, so
/// plain round-off never trips the checks.
class DensityMatrix {
 public:
  explicit DensityMatrix(const ComplexMatrix& m) {
    detail::require(m.rows() == m.cols(), "density matrix must be square");
    detail::require(is_hermitian(m, kHermTol), "density matrix must be Hermitian");
    mat_ = 0.5 * (m + m.adjoint());
    detail::require(std::abs(mat_.trace().real() - 1.0) <= kHermTol &&
                        std::abs(mat_.trace().imag()) <= kHermTol,
                    "density matrix must have unit trace");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(mat_, Eigen::EigenvaluesOnly);
    detail::require(es.eigenvalues().minCoeff() >= -kPsdTol,
                    "density matrix must be positive semidefinite");
  }

  const ComplexMatrix& mat() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  ComplexMatrix mat_;
};

/// 4-vector (p0,p1,p2,p3) defining the Pauli channel sum_j p_j sigma_j . sigma_j.
struct PauliChannelProbs {
  double p0 = 1, p1 = 0, p2 = 0, p3 = 0;

  PauliChannelProbs() = default;
  PauliChannelProbs(double a, double b, double c, double d) : p0(a), p1(b), p2(c), p3(d) {
    for (double p : {p0, p1, p2, p3})
      detail::require(p >= -1e-12, "channel probabilities must be nonnegative");
    detail::require(std::abs(p0 + p1 + p2 + p3 - 1.0) <= 1e-12,
                    "channel probabilities must sum to one");
  }

  double operator[](int j) const {
    switch (j) {
      case 0: return p0;
      case 1: return p1;
      case 2: return p2;
      case 3: return p3;
    }
    throw std::out_of_range("PauliChannelProbs index");
  }

  std::array<double, 4> to_array() const { return {p0, p1, p2, p3}; }
};

/// Simplex point (x1,x2,x3): the mixing weights of the three Cartesian
/// dephasing semigroups, and the sole parameters of the dynamics.
struct MixtureWeights {
  double x1 = 1, x2 = 0, x3 = 0;

  MixtureWeights() = default;
  MixtureWeights(double a, double b, double c) : x1(a), x2(b), x3(c) {
    for (double x : {x1, x2, x3})
      detail::require(x >= 0.0, "mixture weights must be nonnegative");
    detail::require(std::abs(x1 + x2 + x3 - 1.0) <= 1e-12,
                    "mixture weights must sum to one");
  }

  double operator[](int k) const {
    switch (k) {
      case 0: return x1;
      case 1: return x2;
      case 2: return x3;
    }
    throw std::out_of_range("MixtureWeights index");
  }
};

/// rho = (1 + b.sigma)/2.
inline DensityMatrix from_bloch(const BlochVector& b) {
  ComplexMatrix m = 0.5 * (pauli(0) + b.b1 * pauli(1) + b.b2 * pauli(2) + b.b3 * pauli(3));
  return DensityMatrix(m);
}

inline BlochVector to_bloch(const DensityMatrix& rho) {
  detail::require(rho.dim() == 2, "Bloch vector requires a qubit state");
  BlochVector b;
  b.b1 = (rho.mat() * pauli(1)).trace().real();
  b.b2 = (rho.mat() * pauli(2)).trace().real();
  b.b3 = (rho.mat() * pauli(3)).trace().real();
  return b;
}

/// Trace norm ||X||_1 = sum |eigenvalues| of a Hermitian matrix.
inline double trace_norm(const ComplexMatrix& x) {
  detail::require(is_hermitian(x, 1e-10), "trace_norm requires a Hermitian matrix");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (x + x.adjoint()),
                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

/// Trace distance (1/2)||rho1 - rho2||_1.
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return 0.5 * trace_norm(a.mat() - b.mat());
}

/// Partial trace over the factors of a tensor product space. `dims` lists the
/// factor dimensions in tensor order, `keep` the (sorted) indices of the
/// factors to retain.
inline ComplexMatrix partial_trace_matrix(const ComplexMatrix& m,
                                          const std::vector<Eigen::Index>& dims,
                                          const std::vector<int>& keep) {
  Eigen::Index total = 1;
  for (auto d : dims) {
    detail::require(d >= 1, "factor dimensions must be positive");
    total *= d;
  }
  detail::require(total == m.rows() && m.rows() == m.cols(),
                  "factor dimensions do not match matrix size");
  std::vector<bool> kept(dims.size(), false);
  for (int k : keep) {
    detail::require(k >= 0 && k < static_cast<int>(dims.size()), "keep index out of range");
    kept[k] = true;
  }

  Eigen::Index dkeep = 1, dtrace = 1;
  for (size_t i = 0; i < dims.size(); ++i) (kept[i] ? dkeep : dtrace) *= dims[i];

  // Row index <-> multi-index maps; strides in tensor order (factor 0 slowest).
  const int nf = static_cast<int>(dims.size());
  std::vector<Eigen::Index> stride(nf);
  {
    Eigen::Index s = 1;
    for (int i = nf - 1; i >= 0; --i) {
      stride[i] = s;
      s *= dims[i];
    }
  }
  std::vector<Eigen::Index> kfac, tfac;  // factor indices
  for (int i = 0; i < nf; ++i) (kept[i] ? kfac : tfac).push_back(i);

  auto compose = [&](Eigen::Index keep_idx, Eigen::Index tr_idx) {
    Eigen::Index row = 0;
    for (int i = static_cast<int>(kfac.size()) - 1; i >= 0; --i) {
      row += (keep_idx % dims[kfac[i]]) * stride[kfac[i]];
      keep_idx /= dims[kfac[i]];
    }
    for (int i = static_cast<int>(tfac.size()) - 1; i >= 0; --i) {
      row += (tr_idx % dims[tfac[i]]) * stride[tfac[i]];
      tr_idx /= dims[tfac[i]];
    }
    return row;
  };

  ComplexMatrix out = ComplexMatrix::Zero(dkeep, dkeep);
  for (Eigen::Index a = 0; a < dkeep; ++a)
    for (Eigen::Index b = 0; b < dkeep; ++b)
      for (Eigen::Index t = 0; t < dtrace; ++t)
        out(a, b) += m(compose(a, t), compose(b, t));
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho,
                                   const std::vector<Eigen::Index>& dims,
                                   const std::vector<int>& keep) {
  return DensityMatrix(partial_trace_matrix(rho.mat(), dims, keep));
}

/// Apply the Pauli channel sum_j p_j sigma_j rho sigma_j to a qubit state.
inline DensityMatrix apply_pauli_channel(const PauliChannelProbs& p, const DensityMatrix& rho) {
  detail::require(rho.dim() == 2, "Pauli channel acts on qubit states");
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (int j = 0; j < 4; ++j) out += p[j] * pauli(j) * rho.mat() * pauli(j);
  return DensityMatrix(out);
}

/// Kronecker (tensor) product.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Transpose one tensor factor in place (partial transpose).
inline ComplexMatrix partial_transpose(const ComplexMatrix& m,
                                       const std::vector<Eigen::Index>& dims, int factor) {
  detail::require(factor >= 0 && factor < static_cast<int>(dims.size()),
                  "factor index out of range");
  Eigen::Index left = 1, right = 1;
  for (int i = 0; i < factor; ++i) left *= dims[i];
  for (int i = factor + 1; i < static_cast<int>(dims.size()); ++i) right *= dims[i];
  const Eigen::Index d = dims[factor];
  detail::require(left * d * right == m.rows() && m.rows() == m.cols(),
                  "factor dimensions do not match matrix size");
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index l1 = 0; l1 < left; ++l1)
    for (Eigen::Index l2 = 0; l2 < left; ++l2)
      for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b)
          for (Eigen::Index r1 = 0; r1 < right; ++r1)
            for (Eigen::Index r2 = 0; r2 < right; ++r2)
              out((l1 * d + b) * right + r1, (l2 * d + a) * right + r2) =
                  m((l1 * d + a) * right + r1, (l2 * d + b) * right + r2);
  return out;
}

/// Unnormalized 4-point Hadamard transform: H rows are the Klein four-group
/// characters (1,1,1,1), (1,1,-1,-1), (1,-1,1,-1), (1,-1,-1,1). H*H = 4*I, so
/// hadamard4 maps channel probabilities (p0..p3) to Bloch multipliers
/// (1, lambda1, lambda2, lambda3) and (1/4)*H inverts.
inline std::array<double, 4> hadamard4(const std::array<double, 4>& v) {
  return {v[0] + v[1] + v[2] + v[3],
          v[0] + v[1] - v[2] - v[3],
          v[0] - v[1] + v[2] - v[3],
          v[0] - v[1] - v[2] + v[3]};
}

/// Inverse transform: probabilities from (1, lambda1, lambda2, lambda3).
inline std::array<double, 4> hadamard4_inv(const std::array<double, 4>& v) {
  auto h = hadamard4(v);
  return {0.25 * h[0], 0.25 * h[1], 0.25 * h[2], 0.25 * h[3]};
}

}  // namespace dephmix
