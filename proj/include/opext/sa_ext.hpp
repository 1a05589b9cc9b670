#pragma once

// Extremal bound-preserving self-adjoint extensions of a partial symmetric
// operator S0 that is bounded by a positive operator A:
//
//   |<S0 x, y>|^2 <= alpha^2 <Ax, x> <Ay, y>,   x in dom S0, y in C^n.
//
// The construction lifts S0 to a bounded symmetric operator on H_A (range
// coordinates of A), extends alpha +/- S0 there by Krein-von Neumann, and
// pulls the two extremal extensions back with J (.) J^*.

#include <string>

#include "opext/kvn.hpp"

namespace opext {

class SymmetricPartialOperator {
 public:
  SymmetricPartialOperator() = default;

  static SymmetricPartialOperator make(Matrix domain, Matrix values, const Tolerances& tol) {
    require_finite(domain, "domain basis");
    require_finite(values, "values");
    require_same_shape(domain, values, "domain basis and values must have the same shape");
    if (domain.rows() == 0) fail(Errc::DimensionMismatch, "ambient dimension must be positive");
    if (numerical_rank(domain, tol) != domain.cols()) {
      fail(Errc::DependentDomain, "domain basis columns are not independent");
    }
    Matrix m = domain.adjoint() * values;
    const double asym = frob(m - m.adjoint());
    if (asym > tol.herm * (1.0 + frob(m))) {
      fail(Errc::NotSymmetric, "D^* V is not Hermitian (asymmetry " + std::to_string(asym) + ")");
    }
    SymmetricPartialOperator op;
    op.d_ = std::move(domain);
    op.v_ = std::move(values);
    return op;
  }

  /// Everywhere-defined operator with domain basis I.
  static SymmetricPartialOperator total(const HermitianMatrix& s) {
    SymmetricPartialOperator op;
    op.d_ = Matrix::Identity(s.dim(), s.dim());
    op.v_ = s.matrix();
    return op;
  }

  Index ambient_dim() const noexcept { return d_.rows(); }
  Index domain_dim() const noexcept { return d_.cols(); }
  const Matrix& domain() const noexcept { return d_; }
  const Matrix& values() const noexcept { return v_; }

 private:
  Matrix d_;
  Matrix v_;
};

/// S0 transported to H_A. U holds J^* d_j, W the Riesz representatives of
/// y |-> <S0 d_j, y>. `basis` is an orthonormal basis of span(U) and
/// `basis_values` the lifted operator on it, corrected so that
/// basis^* basis_values is exactly Hermitian.
struct LiftedSymmetric {
  HilbertLift lift;
  Matrix u;
  Matrix w;
  Matrix basis;
  Matrix basis_values;
  double alpha = 0.0;

  /// The lifted operator as a partial symmetric operator on C^r.
  SymmetricPartialOperator hilbert_operator(const Tolerances& tol) const {
    return SymmetricPartialOperator::make(basis, basis_values, tol);
  }
};

inline LiftedSymmetric lift_symmetric(const SymmetricPartialOperator& s0, const PsdMatrix& a, const Tolerances& tol) {
  if (a.dim() != s0.ambient_dim()) fail(Errc::DimensionMismatch, "bounding operator and S0 live in different spaces");
  LiftedSymmetric out;
  out.lift = hilbert_lift(a, tol);
  const HilbertLift& lift = out.lift;
  const Matrix& v = s0.values();

  const double escape = frob(v - lift.range_projector() * v);
  if (escape > tol.eq * (1.0 + frob(v))) {
    fail(Errc::NotABounded, "values of S0 leave ran A (residual " + std::to_string(escape) + ")");
  }

  out.u = lift.coords(s0.domain());
  out.w = lift.riesz(v);
  const Index r = lift.rank;
  const Index k = s0.domain_dim();
  if (r == 0 || k == 0) {
    out.basis = Matrix(r, 0);
    out.basis_values = Matrix(r, 0);
    return out;
  }

  Eigen::JacobiSVD<Matrix> svd(out.u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();
  Index rho = 0;
  if (sv(0) > 0.0) {
    const double cut = rank_cutoff(r, k, sv(0), tol);
    while (rho < sv.size() && sv(rho) > cut) ++rho;
  }
  Matrix kernel = svd.matrixV().rightCols(k - rho);
  const double leak = frob(out.w * kernel);
  if (leak > tol.eq * (1.0 + frob(out.w))) {
    fail(Errc::NotABounded, "S0 is nonzero on vectors with <Ax, x> = 0 (residual " + std::to_string(leak) + ")");
  }

  out.basis = svd.matrixU().leftCols(rho);
  RealVector inv = sv.head(rho).cwiseInverse();
  Matrix y = out.w * svd.matrixV().leftCols(rho) * inv.cast<Complex>().asDiagonal();
  Matrix c = out.basis.adjoint() * y;
  Matrix c_sym = (c + c.adjoint()) / 2.0;
  y += out.basis * (c_sym - c);
  out.basis_values = y;
  out.alpha = spectral_norm(y);
  return out;
}

/// The A-bound alpha_A(S0), computed as the operator norm of the lift.
inline double a_bound(const SymmetricPartialOperator& s0, const PsdMatrix& a, const Tolerances& tol) {
  return lift_symmetric(s0, a, tol).alpha;
}

struct ExtensionInterval {
  double alpha = 0.0;
  HermitianMatrix s_min;
  HermitianMatrix s_max;
  /// The same endpoints as operators on H_A (range coordinates).
  HermitianMatrix lifted_min;
  HermitianMatrix lifted_max;
};

inline ExtensionInterval extend_symmetric(const SymmetricPartialOperator& s0, const PsdMatrix& a,
                                          const Tolerances& tol) {
  LiftedSymmetric ls = lift_symmetric(s0, a, tol);
  const Index r = ls.lift.rank;
  const double alpha = ls.alpha;
  const Matrix id = Matrix::Identity(r, r);

  auto kvn_of = [&](const Matrix& values) -> Matrix {
    if (r == 0) return Matrix(0, 0);
    try {
      return kvn_extend(PartialPositiveOperator::make(ls.basis, values, tol), tol).matrix();
    } catch (const Error& e) {
      fail(Errc::NumericalFailure, std::string("extremal extension step failed: ") + e.what());
    }
  };

  Matrix a_min = kvn_of(alpha * ls.basis + ls.basis_values);
  Matrix a_max = kvn_of(alpha * ls.basis - ls.basis_values);

  ExtensionInterval iv;
  iv.alpha = alpha;
  iv.lifted_min = HermitianMatrix::symmetrized(a_min - alpha * id);
  iv.lifted_max = HermitianMatrix::symmetrized(alpha * id - a_max);
  if (r == 0) {
    iv.s_min = HermitianMatrix::zero(a.dim());
    iv.s_max = HermitianMatrix::zero(a.dim());
  } else {
    iv.s_min = HermitianMatrix::symmetrized(ls.lift.sandwich(iv.lifted_min.matrix()));
    iv.s_max = HermitianMatrix::symmetrized(ls.lift.sandwich(iv.lifted_max.matrix()));
  }
  return iv;
}

/// A-bound of an everywhere-defined Hermitian operator.
inline double alpha_of_total(const HermitianMatrix& s, const PsdMatrix& a, const Tolerances& tol) {
  if (s.dim() != a.dim()) fail(Errc::DimensionMismatch, "alpha_of_total operands differ in size");
  HilbertLift lift = hilbert_lift(a, tol);
  Matrix p = lift.range_projector();
  const double escape = frob(s.matrix() - p * s.matrix() * p);
  if (escape > tol.eq * (1.0 + frob(s.matrix()))) {
    fail(Errc::NotABounded, "operator is not supported on ran A (residual " + std::to_string(escape) + ")");
  }
  return spectral_norm(lift.pinv_sqrt_a * s.matrix() * lift.pinv_sqrt_a);
}

inline bool in_interval(const HermitianMatrix& s, const ExtensionInterval& iv, const Tolerances& tol) {
  if (s.dim() != iv.s_min.dim()) fail(Errc::DimensionMismatch, "probe and interval differ in size");
  return loewner_leq(iv.s_min, s, tol) && loewner_leq(s, iv.s_max, tol);
}

/// Hilbert-space case (A = I): a Hermitian B that leaves dom S0 invariant and
/// satisfies B S0 ⊆ S0 B commutes with both extremal extensions. Returns the
/// result of checking that; a violated hypothesis is an error, not `false`.
inline bool check_commutation(const HermitianMatrix& b, const SymmetricPartialOperator& s0, const PsdMatrix& a,
                              const Tolerances& tol) {
  const Index n = s0.ambient_dim();
  if (b.dim() != n || a.dim() != n) fail(Errc::DimensionMismatch, "B, A and S0 must share the ambient space");
  const Matrix id = Matrix::Identity(n, n);
  if (frob(a.matrix() - id) > tol.eq * (1.0 + frob(id))) {
    fail(Errc::HypothesisViolated, "commutation transport requires A = I");
  }
  const Matrix& d = s0.domain();
  const Matrix& v = s0.values();
  const Matrix& bm = b.matrix();
  const double bnorm = spectral_norm(bm);
  Matrix coeff = pinv(d, tol) * bm * d;  // B D = D C
  if (frob(bm * d - d * coeff) > tol.eq * (1.0 + bnorm * frob(d))) {
    fail(Errc::HypothesisViolated, "B does not leave dom S0 invariant");
  }
  if (frob(v * coeff - bm * v) > tol.eq * (1.0 + bnorm * frob(v))) {
    fail(Errc::HypothesisViolated, "B S0 is not contained in S0 B");
  }
  ExtensionInterval iv = extend_symmetric(s0, a, tol);
  const Matrix& sm = iv.s_min.matrix();
  const Matrix& sM = iv.s_max.matrix();
  const double bound = tol.eq * (1.0 + bnorm * std::max(spectral_norm(sm), spectral_norm(sM)));
  return frob(sm * bm - bm * sm) <= bound && frob(sM * bm - bm * sM) <= bound;
}

}  // namespace opext
