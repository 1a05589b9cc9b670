#pragma once

// Krein-von Neumann extension of a partially defined positive operator on C^n.
//
// The anti-dual pair is E = F = C^n with <f, x> = x^* f. A partial operator is
// given by a domain basis D (n x k, independent columns) and values G = A D.

#include <string>

#include "opext/numkit.hpp"

namespace opext {

class PartialPositiveOperator {
 public:
  PartialPositiveOperator() = default;

  /// Validates shapes, finiteness, independence of the domain columns, and
  /// positivity of the compressed form D^* G. The kernel condition is not
  /// checked here; see check_restriction.
  static PartialPositiveOperator make(Matrix domain, Matrix values, const Tolerances& tol) {
    require_finite(domain, "domain basis");
    require_finite(values, "values");
    require_same_shape(domain, values, "domain basis and values must have the same shape");
    if (domain.rows() == 0) fail(Errc::DimensionMismatch, "ambient dimension must be positive");
    if (numerical_rank(domain, tol) != domain.cols()) {
      fail(Errc::DependentDomain, "domain basis columns are not independent");
    }
    Matrix m = domain.adjoint() * values;
    HermitianMatrix mh = hermitize(m, tol);
    PsdMatrix::from(mh, tol);  // throws NotPsd
    PartialPositiveOperator op;
    op.d_ = std::move(domain);
    op.g_ = std::move(values);
    op.m_ = mh;
    return op;
  }

  Index ambient_dim() const noexcept { return d_.rows(); }
  Index domain_dim() const noexcept { return d_.cols(); }
  const Matrix& domain() const noexcept { return d_; }
  const Matrix& values() const noexcept { return g_; }
  /// Compressed form D^* G (Hermitian part).
  const HermitianMatrix& compression() const noexcept { return m_; }

 private:
  Matrix d_;
  Matrix g_;
  HermitianMatrix m_;
};

namespace detail {

// Splits the compression M = D^* G into its numerically positive part and the
// complementary (kernel) directions, using the relative rank cutoff.
struct CompressionSplit {
  Matrix range_vectors;
  RealVector range_values;
  Matrix kernel_vectors;
};

inline CompressionSplit split_compression(const HermitianMatrix& m, const Tolerances& tol) {
  const Index k = m.dim();
  CompressionSplit out{Matrix(k, 0), RealVector(0), Matrix(k, 0)};
  if (k == 0) return out;
  Eigh e = m.eigh();
  const double scale = std::max(std::abs(e.values(0)), std::abs(e.values(k - 1)));
  const double cut = rank_cutoff(k, k, scale, tol);
  Index r = 0;
  while (r < k && e.values(r) > cut && e.values(r) > 0.0) ++r;
  out.range_vectors = e.vectors.leftCols(r);
  out.range_values = e.values.head(r);
  out.kernel_vectors = e.vectors.rightCols(k - r);
  return out;
}

inline double restriction_residual(const PartialPositiveOperator& op, const Tolerances& tol) {
  CompressionSplit s = split_compression(op.compression(), tol);
  return frob(op.values() * s.kernel_vectors);
}

}  // namespace detail

/// Finite-dimensional form of the condition |<Ax, y>|^2 <= M_y <Ax, x>:
/// ker(D^* G) must lie in ker(G).
inline bool check_restriction(const PartialPositiveOperator& op, const Tolerances& tol) {
  return detail::restriction_residual(op, tol) <= tol.eq * (1.0 + frob(op.values()));
}

/// Smallest positive everywhere-defined extension, A_N = G M^+ G^* with
/// M = D^* G. Assembled as Z Z^* so the result is PSD by construction.
inline PsdMatrix kvn_extend(const PartialPositiveOperator& op, const Tolerances& tol) {
  const double residual = detail::restriction_residual(op, tol);
  if (residual > tol.eq * (1.0 + frob(op.values()))) {
    fail(Errc::RestrictionConditionFailed,
         "restriction condition |<Ax,y>|^2 <= M_y <Ax,x> fails: ker(D^*G) is not contained in ker(G) "
         "(residual " + std::to_string(residual) + ")");
  }
  detail::CompressionSplit s = detail::split_compression(op.compression(), tol);
  RealVector inv_root = s.range_values.cwiseSqrt().cwiseInverse();
  Matrix z = op.values() * s.range_vectors * inv_root.cast<Complex>().asDiagonal();
  return PsdMatrix::gram(z);
}

/// Finite-dimensional model of the auxiliary Hilbert space H_A.
///
/// H_A is identified with C^r (r = rank A) through the orthonormal range
/// basis Q. The embedding J : H_A -> C^n is h |-> sqrtA Q h and its adjoint
/// J^* : C^n -> H_A is x |-> Q^* sqrtA x, so that J J^* = A and
/// <J^* x, J^* y> = y^* A x.
struct HilbertLift {
  PsdMatrix a;
  PsdMatrix sqrt_a;
  Matrix pinv_sqrt_a;
  Index rank = 0;
  Matrix range_basis;

  Index ambient_dim() const noexcept { return a.dim(); }

  /// J: range coordinates -> ambient.
  Matrix embed(const Matrix& h) const { return sqrt_a.matrix() * (range_basis * h); }

  /// J^*: ambient -> range coordinates.
  Matrix coords(const Matrix& x) const { return range_basis.adjoint() * (sqrt_a.matrix() * x); }

  /// Riesz representative in range coordinates of the functional y |-> y^* v,
  /// valid when v lies in ran A.
  Matrix riesz(const Matrix& v) const { return range_basis.adjoint() * (pinv_sqrt_a * v); }

  /// Orthogonal projector onto ran A.
  Matrix range_projector() const { return range_basis * range_basis.adjoint(); }

  /// J X J^* for an operator X on range coordinates.
  Matrix sandwich(const Matrix& x) const {
    Matrix jq = sqrt_a.matrix() * range_basis;
    return jq * x * jq.adjoint();
  }
};

inline HilbertLift hilbert_lift(const PsdMatrix& a, const Tolerances& tol) {
  const Index n = a.dim();
  HilbertLift lift;
  lift.a = a;
  if (n == 0) {
    lift.sqrt_a = a;
    lift.pinv_sqrt_a = Matrix(0, 0);
    lift.range_basis = Matrix(0, 0);
    return lift;
  }
  Eigh e = a.hermitian().eigh();
  RealVector lam = e.values.cwiseMax(0.0);
  const double cut = rank_cutoff(n, n, lam(0), tol);
  Index r = 0;
  while (r < n && lam(r) > cut && lam(r) > 0.0) ++r;
  RealVector root = lam.cwiseSqrt();
  lift.sqrt_a = PsdMatrix::assume(
      HermitianMatrix::symmetrized(e.vectors * root.cast<Complex>().asDiagonal() * e.vectors.adjoint()));
  Matrix q = e.vectors.leftCols(r);
  RealVector inv_root = root.head(r).cwiseInverse();
  lift.pinv_sqrt_a = q * inv_root.cast<Complex>().asDiagonal() * q.adjoint();
  lift.pinv_sqrt_a = (lift.pinv_sqrt_a + lift.pinv_sqrt_a.adjoint()).eval() / 2.0;
  lift.rank = r;
  lift.range_basis = q;
  return lift;
}

}  // namespace opext
