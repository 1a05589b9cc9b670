#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include "opext/error.hpp"

namespace opext {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numerical slack shared by every construction. Threaded explicitly through
/// each call; there is no global tolerance state.
///
/// `rank` is a per-dimension factor: the singular-value cutoff applied to an
/// r x c matrix is rank * max(r, c) * sigma_max.
struct Tolerances {
  double rank = 1e-10;
  double psd = 1e-8;
  double herm = 1e-10;
  double eq = 1e-8;

  void validate() const {
    for (double v : {rank, psd, herm, eq}) {
      if (!std::isfinite(v) || v < 0.0) fail(Errc::InvalidInput, "tolerances must be finite and nonnegative");
    }
  }
};

inline void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) fail(Errc::NotFinite, what + " has non-finite entries");
}

inline void require_square(const Matrix& m, const std::string& what) {
  if (m.rows() != m.cols()) {
    fail(Errc::DimensionMismatch, what + " must be square, got " + std::to_string(m.rows()) + "x" +
                                      std::to_string(m.cols()));
  }
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const std::string& what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) fail(Errc::DimensionMismatch, what);
}

inline double frob(const Matrix& m) { return m.size() == 0 ? 0.0 : m.norm(); }

/// Singular values in descending order; empty for an empty matrix.
inline RealVector singular_values(const Matrix& m) {
  if (m.size() == 0) return RealVector(0);
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

inline double spectral_norm(const Matrix& m) {
  RealVector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(0);
}

inline double rank_cutoff(Index rows, Index cols, double sigma_max, const Tolerances& tol) {
  return tol.rank * static_cast<double>(std::max<Index>({rows, cols, 1})) * sigma_max;
}

inline Index numerical_rank(const Matrix& m, const Tolerances& tol) {
  RealVector s = singular_values(m);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cut = rank_cutoff(m.rows(), m.cols(), s(0), tol);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++r;
  }
  return r;
}

/// Moore-Penrose pseudo-inverse with a relative singular-value cutoff.
inline Matrix pinv(const Matrix& m, const Tolerances& tol) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  Matrix out = Matrix::Zero(m.cols(), m.rows());
  if (s(0) == 0.0) return out;
  const double cut = rank_cutoff(m.rows(), m.cols(), s(0), tol);
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) out.noalias() += (svd.matrixV().col(i) / s(i)) * svd.matrixU().col(i).adjoint();
  }
  return out;
}

/// Eigendecomposition of a Hermitian matrix with a reproducible layout:
/// eigenvalues descending (ties keep the solver order) and each eigenvector's
/// first non-negligible component rotated to be real positive.
struct Eigh {
  RealVector values;
  Matrix vectors;
};

inline Eigh eigh_raw(const Matrix& h) {
  const Index n = h.rows();
  if (n == 0) return {RealVector(0), Matrix(0, 0)};
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) fail(Errc::NumericalFailure, "eigendecomposition did not converge");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return es.eigenvalues()(a) > es.eigenvalues()(b); });
  Eigh out{RealVector(n), Matrix(n, n)};
  for (Index j = 0; j < n; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    out.values(j) = es.eigenvalues()(src);
    Vector v = es.eigenvectors().col(src);
    for (Index i = 0; i < n; ++i) {
      if (std::abs(v(i)) > 1e-10) {
        v *= std::conj(v(i)) / std::abs(v(i));
        v(i) = Complex(std::abs(v(i)), 0.0);
        break;
      }
    }
    out.vectors.col(j) = v;
  }
  return out;
}

/// Square complex matrix whose stored form is exactly (X + X^*) / 2.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  /// Hermitian part of `m`, with no closeness check. For internally computed
  /// quantities that are Hermitian up to rounding.
  static HermitianMatrix symmetrized(const Matrix& m) {
    require_square(m, "hermitian matrix");
    require_finite(m, "hermitian matrix");
    HermitianMatrix h;
    h.m_ = (m + m.adjoint()) / 2.0;
    return h;
  }

  static HermitianMatrix identity(Index n) { return symmetrized(Matrix::Identity(n, n)); }
  static HermitianMatrix zero(Index n) { return symmetrized(Matrix::Zero(n, n)); }

  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }

  Eigh eigh() const { return eigh_raw(m_); }

  friend HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b) {
    return symmetrized(a.m_ - b.m_);
  }
  friend HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b) {
    return symmetrized(a.m_ + b.m_);
  }
  friend HermitianMatrix operator*(double s, const HermitianMatrix& a) { return symmetrized(s * a.m_); }

 private:
  Matrix m_;
};

/// Rejects matrices that are not Hermitian within tol.herm; such inputs
/// indicate a corrupted instance rather than rounding noise.
inline HermitianMatrix hermitize(const Matrix& m, const Tolerances& tol) {
  require_square(m, "hermitize input");
  require_finite(m, "hermitize input");
  const double asym = frob(m - m.adjoint());
  if (asym > tol.herm * (1.0 + frob(m))) {
    fail(Errc::NotHermitian, "asymmetry ||M - M*||_F = " + std::to_string(asym));
  }
  return HermitianMatrix::symmetrized(m);
}

/// Hermitian matrix whose smallest eigenvalue is >= -tol.psd * (1 + lambda_max).
class PsdMatrix {
 public:
  PsdMatrix() = default;

  static PsdMatrix from(const HermitianMatrix& h, const Tolerances& tol) {
    if (h.dim() > 0) {
      RealVector ev = h.eigh().values;
      const double lmax = std::max(ev(0), 0.0);
      const double lmin = ev(ev.size() - 1);
      if (lmin < -tol.psd * (1.0 + lmax)) {
        fail(Errc::NotPsd, "smallest eigenvalue " + std::to_string(lmin) + " below PSD slack");
      }
    }
    PsdMatrix p;
    p.h_ = h;
    return p;
  }

  /// Gram-type product Z Z^*, PSD by construction.
  static PsdMatrix gram(const Matrix& z) {
    PsdMatrix p;
    p.h_ = HermitianMatrix::symmetrized(z * z.adjoint());
    return p;
  }

  /// Wraps a Hermitian matrix that is PSD by construction (spectral formulas
  /// with clamped eigenvalues). No check is performed.
  static PsdMatrix assume(const HermitianMatrix& h) {
    PsdMatrix p;
    p.h_ = h;
    return p;
  }

  static PsdMatrix identity(Index n) { return gram(Matrix::Identity(n, n)); }
  static PsdMatrix zero(Index n) { return gram(Matrix::Zero(n, n)); }

  const Matrix& matrix() const noexcept { return h_.matrix(); }
  const HermitianMatrix& hermitian() const noexcept { return h_; }
  Index dim() const noexcept { return h_.dim(); }

 private:
  HermitianMatrix h_;
};

inline PsdMatrix make_psd(const Matrix& m, const Tolerances& tol) { return PsdMatrix::from(hermitize(m, tol), tol); }

/// Principal square root; slightly negative eigenvalues are clamped to zero.
inline PsdMatrix psd_sqrt(const PsdMatrix& a, const Tolerances& tol) {
  (void)tol;
  if (a.dim() == 0) return a;
  Eigh e = a.hermitian().eigh();
  RealVector root = e.values.cwiseMax(0.0).cwiseSqrt();
  Matrix r = e.vectors * root.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  return PsdMatrix::assume(HermitianMatrix::symmetrized(r));
}

/// Loewner order: a <= b iff b - a is PSD within tol.psd * (1 + ||b - a||_2).
inline bool loewner_leq(const HermitianMatrix& a, const HermitianMatrix& b, const Tolerances& tol) {
  if (a.dim() != b.dim()) fail(Errc::DimensionMismatch, "loewner_leq operands differ in size");
  if (a.dim() == 0) return true;
  RealVector ev = (b - a).eigh().values;
  const double norm2 = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return ev(ev.size() - 1) >= -tol.psd * (1.0 + norm2);
}

inline bool is_projector(const Matrix& p, const Tolerances& tol) {
  if (p.rows() != p.cols()) return false;
  const double scale = 1.0 + frob(p);
  return frob(p - p.adjoint()) <= tol.eq * scale && frob(p * p - p) <= tol.eq * scale;
}

/// Orthonormal basis of the column span, built by twice-iterated Gram-Schmidt
/// over the columns in order. For a projector onto span{e_1} this returns e_1.
inline Matrix column_basis(const Matrix& m, const Tolerances& tol) {
  double scale = 0.0;
  for (Index j = 0; j < m.cols(); ++j) scale = std::max(scale, m.col(j).norm());
  std::vector<Vector> kept;
  for (Index j = 0; j < m.cols(); ++j) {
    Vector v = m.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& q : kept) v -= q * q.dot(v);
    }
    const double nv = v.norm();
    if (nv > tol.eq * (1.0 + scale) && nv > 0.0) kept.push_back(v / nv);
  }
  Matrix out(m.rows(), static_cast<Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) out.col(static_cast<Index>(j)) = kept[j];
  return out;
}

/// Indices (ascending) of a maximal well-conditioned independent column
/// subset, chosen by column-pivoted QR; the subset size is numerical_rank(m).
inline std::vector<Index> independent_columns(const Matrix& m, const Tolerances& tol) {
  const Index r = numerical_rank(m, tol);
  std::vector<Index> idx;
  if (r == 0) return idx;
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  const auto& perm = qr.colsPermutation().indices();
  for (Index j = 0; j < r; ++j) idx.push_back(perm(j));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline Matrix select_columns(const Matrix& m, const std::vector<Index>& idx) {
  Matrix out(m.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = m.col(idx[j]);
  return out;
}

inline Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

/// Column-major vectorization: vec(x)(i + j * rows) = x(i, j).
inline Vector vec(const Matrix& x) { return Eigen::Map<const Vector>(x.data(), x.size()); }

inline Matrix unvec(const Vector& v, Index rows, Index cols) { return Eigen::Map<const Matrix>(v.data(), rows, cols); }

}  // namespace opext
