#pragma once

// Bounded completions of a pair of mutually adjoint partial operators.
//
// Given T1 : E1 ⊇ dom T1 -> F2 and T2 : E2 ⊇ dom T2 -> F1 with
// <T1 x1, x2> = conj <T2 x2, x1>, and bounds
//   |<T1 x1, y2>|^2 <= alpha1 <A1 x1, x1> <A2 y2, y2>,
//   |<T2 x2, y1>|^2 <= alpha2 <A1 y1, y1> <A2 x2, x2>,
// an everywhere-defined T with T1 ⊆ T, T2 ⊆ T^* and bound max(alpha1, alpha2)
// is read off the off-diagonal block of a self-adjoint extension of
// S0(x1, x2) = (T2 x2, T1 x1) bounded by diag(A1, A2).
//
// alpha1 and alpha2 are squared-scale constants (they multiply the product of
// quadratic forms directly); the symmetric bound handed to the extension step
// is max(sqrt(alpha1), sqrt(alpha2)).

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "opext/sa_ext.hpp"

namespace opext {

/// Which endpoint of the extension interval the completion is read from.
enum class Endpoint { Min, Max, Mid };

struct ParrottInstance {
  Matrix domain1;  // n1 x k1
  Matrix values1;  // n2 x k1, T1 on domain1
  Matrix domain2;  // n2 x k2
  Matrix values2;  // n1 x k2, T2 on domain2
  PsdMatrix a1;
  PsdMatrix a2;
  double alpha1 = 0.0;
  double alpha2 = 0.0;

  Index n1() const noexcept { return a1.dim(); }
  Index n2() const noexcept { return a2.dim(); }

  /// Shape, finiteness and independence checks. Throws on violation.
  void validate(const Tolerances& tol) const {
    const Index d1 = n1(), d2 = n2();
    if (d1 == 0 || d2 == 0) fail(Errc::DimensionMismatch, "ambient dimensions must be positive");
    if (domain1.rows() != d1 || values1.rows() != d2 || values1.cols() != domain1.cols()) {
      fail(Errc::DimensionMismatch, "T1 must map an n1 x k1 domain basis to n2 x k1 values");
    }
    if (domain2.rows() != d2 || values2.rows() != d1 || values2.cols() != domain2.cols()) {
      fail(Errc::DimensionMismatch, "T2 must map an n2 x k2 domain basis to n1 x k2 values");
    }
    for (const Matrix* m : {&domain1, &values1, &domain2, &values2}) require_finite(*m, "parrott data");
    if (!std::isfinite(alpha1) || !std::isfinite(alpha2) || alpha1 < 0.0 || alpha2 < 0.0) {
      fail(Errc::InvalidInput, "alpha1 and alpha2 must be finite and nonnegative");
    }
    if (numerical_rank(domain1, tol) != domain1.cols() || numerical_rank(domain2, tol) != domain2.cols()) {
      fail(Errc::DependentDomain, "domain bases must have independent columns");
    }
  }
};

struct CompatibilityReport {
  double adjoint_residual = 0.0;  // ||D2^* V1 - V2^* D1||_F
  double bound1 = 0.0;            // smallest alpha1 that works, +inf if none
  double bound2 = 0.0;
  bool adjoint_ok = false;
  bool bounds_ok = false;
  bool ok() const noexcept { return adjoint_ok && bounds_ok; }
};

namespace detail {

// Smallest c with |y^* V x|^2 <= c <A_dom x, x> <A_val y, y> over x in span(D),
// or +inf when no such c exists.
inline double partial_bound_sq(const Matrix& domain, const Matrix& values, const HilbertLift& dom_lift,
                               const HilbertLift& val_lift, const Tolerances& tol) {
  if (domain.cols() == 0) return 0.0;
  const double escape = frob(values - val_lift.range_projector() * values);
  if (escape > tol.eq * (1.0 + frob(values))) return std::numeric_limits<double>::infinity();
  Matrix u = dom_lift.coords(domain);
  Matrix w = val_lift.riesz(values);
  if (u.size() == 0 || w.size() == 0) {
    return frob(values) <= tol.eq ? 0.0 : std::numeric_limits<double>::infinity();
  }
  Eigen::JacobiSVD<Matrix> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();
  Index rho = 0;
  if (sv(0) > 0.0) {
    const double cut = rank_cutoff(u.rows(), u.cols(), sv(0), tol);
    while (rho < sv.size() && sv(rho) > cut) ++rho;
  }
  Matrix kernel = svd.matrixV().rightCols(u.cols() - rho);
  if (frob(w * kernel) > tol.eq * (1.0 + frob(w))) return std::numeric_limits<double>::infinity();
  RealVector inv = sv.head(rho).cwiseInverse();
  const double s = spectral_norm(w * svd.matrixV().leftCols(rho) * inv.cast<Complex>().asDiagonal());
  return s * s;
}

}  // namespace detail

inline CompatibilityReport compatibility_report(const ParrottInstance& inst, const Tolerances& tol) {
  inst.validate(tol);
  CompatibilityReport rep;
  Matrix lhs = inst.domain2.adjoint() * inst.values1;
  Matrix rhs = inst.values2.adjoint() * inst.domain1;
  rep.adjoint_residual = frob(lhs - rhs);
  rep.adjoint_ok = rep.adjoint_residual <= tol.eq * (1.0 + frob(lhs) + frob(rhs));
  HilbertLift l1 = hilbert_lift(inst.a1, tol);
  HilbertLift l2 = hilbert_lift(inst.a2, tol);
  rep.bound1 = detail::partial_bound_sq(inst.domain1, inst.values1, l1, l2, tol);
  rep.bound2 = detail::partial_bound_sq(inst.domain2, inst.values2, l2, l1, tol);
  rep.bounds_ok = rep.bound1 <= inst.alpha1 * (1.0 + tol.eq) + tol.eq &&
                  rep.bound2 <= inst.alpha2 * (1.0 + tol.eq) + tol.eq;
  return rep;
}

inline bool check_compatibility(const ParrottInstance& inst, const Tolerances& tol) {
  return compatibility_report(inst, tol).ok();
}

/// The product-space symmetric operator and its bounding operator.
struct ProductSystem {
  SymmetricPartialOperator s0;
  PsdMatrix lambda;
  /// max(sqrt(alpha1), sqrt(alpha2)): the bound on the symmetric scale.
  double alpha = 0.0;
};

inline ProductSystem assemble_symmetric(const ParrottInstance& inst, const Tolerances& tol) {
  CompatibilityReport rep = compatibility_report(inst, tol);
  if (!rep.adjoint_ok) {
    fail(Errc::IncompatibleInstance,
         "<T1 x1, x2> != conj <T2 x2, x1> (residual " + std::to_string(rep.adjoint_residual) + ")");
  }
  const Index n1 = inst.n1(), n2 = inst.n2();
  const Index k1 = inst.domain1.cols(), k2 = inst.domain2.cols();
  Matrix domain = block_diag(inst.domain1, inst.domain2);
  Matrix values = Matrix::Zero(n1 + n2, k1 + k2);
  values.bottomLeftCorner(n2, k1) = inst.values1;
  values.topRightCorner(n1, k2) = inst.values2;
  Tolerances sym_tol = tol;
  sym_tol.herm = std::max(tol.herm, tol.eq);
  ProductSystem sys;
  sys.s0 = SymmetricPartialOperator::make(std::move(domain), std::move(values), sym_tol);
  sys.lambda = PsdMatrix::assume(HermitianMatrix::symmetrized(block_diag(inst.a1.matrix(), inst.a2.matrix())));
  sys.alpha = std::max(std::sqrt(inst.alpha1), std::sqrt(inst.alpha2));
  return sys;
}

inline Matrix parrott_complete(const ParrottInstance& inst, const Tolerances& tol, Endpoint endpoint = Endpoint::Min) {
  CompatibilityReport rep = compatibility_report(inst, tol);
  if (!rep.adjoint_ok) {
    fail(Errc::IncompatibleInstance,
         "<T1 x1, x2> != conj <T2 x2, x1> (residual " + std::to_string(rep.adjoint_residual) + ")");
  }
  if (!rep.bounds_ok) {
    fail(Errc::NotABounded, "declared alphas too small: need alpha1 >= " + std::to_string(rep.bound1) +
                                ", alpha2 >= " + std::to_string(rep.bound2));
  }
  ProductSystem sys = assemble_symmetric(inst, tol);
  ExtensionInterval iv = extend_symmetric(sys.s0, sys.lambda, tol);
  if (iv.alpha > sys.alpha * (1.0 + tol.eq) + tol.eq) {
    fail(Errc::NotABounded, "product operator bound " + std::to_string(iv.alpha) + " exceeds declared " +
                                std::to_string(sys.alpha));
  }
  Matrix s;
  switch (endpoint) {
    case Endpoint::Min: s = iv.s_min.matrix(); break;
    case Endpoint::Max: s = iv.s_max.matrix(); break;
    case Endpoint::Mid: s = (iv.s_min.matrix() + iv.s_max.matrix()) / 2.0; break;
  }
  return s.bottomLeftCorner(inst.n2(), inst.n1());
}

/// sigma_max(pinv(sqrt A2) T pinv(sqrt A1))^2: the smallest constant c with
/// |<T y1, y2>|^2 <= c <A1 y1, y1> <A2 y2, y2>, provided T is supported on
/// the ranges.
inline double completion_bound_sq(const Matrix& t, const PsdMatrix& a1, const PsdMatrix& a2, const Tolerances& tol) {
  HilbertLift l1 = hilbert_lift(a1, tol);
  HilbertLift l2 = hilbert_lift(a2, tol);
  const double s = spectral_norm(l2.pinv_sqrt_a * t * l1.pinv_sqrt_a);
  return s * s;
}

struct StrongParrottInstance {
  Matrix s1;  // dim H x p
  Matrix s2;  // dim K x p
  Matrix t1;  // q x dim H
  Matrix t2;  // q x dim K

  void validate() const {
    if (s1.cols() != s2.cols() || t1.rows() != t2.rows() || t1.cols() != s1.rows() || t2.cols() != s2.rows()) {
      fail(Errc::DimensionMismatch, "need S1: E1->H, S2: E1->K, T1: H->F2, T2: K->F2");
    }
    if (s1.rows() == 0 || s2.rows() == 0) fail(Errc::DimensionMismatch, "H and K must be nonzero");
    for (const Matrix* m : {&s1, &s2, &t1, &t2}) require_finite(*m, "strong parrott data");
  }
};

/// Which of the three hypotheses T1 S1 = T2 S2, S2^*S2 <= S1^*S1,
/// T1 T1^* <= T2 T2^* hold.
struct StrongParrottHypotheses {
  bool intertwining = false;
  bool domain_order = false;
  bool range_order = false;
  bool ok() const noexcept { return intertwining && domain_order && range_order; }
  std::string describe_failures() const {
    std::string out;
    auto add = [&](bool okay, const char* what) {
      if (okay) return;
      if (!out.empty()) out += "; ";
      out += what;
    };
    add(intertwining, "T1 S1 != T2 S2");
    add(domain_order, "S2^* S2 <= S1^* S1 fails");
    add(range_order, "T1 T1^* <= T2 T2^* fails");
    return out;
  }
};

inline StrongParrottHypotheses check_strong_parrott(const StrongParrottInstance& inst, const Tolerances& tol) {
  inst.validate();
  StrongParrottHypotheses h;
  Matrix lhs = inst.t1 * inst.s1;
  Matrix rhs = inst.t2 * inst.s2;
  h.intertwining = frob(lhs - rhs) <= tol.eq * (1.0 + frob(inst.t1) * frob(inst.s1));
  h.domain_order = loewner_leq(HermitianMatrix::symmetrized(inst.s2.adjoint() * inst.s2),
                               HermitianMatrix::symmetrized(inst.s1.adjoint() * inst.s1), tol);
  h.range_order = loewner_leq(HermitianMatrix::symmetrized(inst.t1 * inst.t1.adjoint()),
                              HermitianMatrix::symmetrized(inst.t2 * inst.t2.adjoint()), tol);
  return h;
}

namespace detail {

// Restricts the map defined column-wise by src_j |-> dst_j to an independent
// subset of src, checking that the dropped columns agree with it.
inline std::pair<Matrix, Matrix> independent_restriction(const Matrix& src, const Matrix& dst, const char* what,
                                                         const Tolerances& tol) {
  std::vector<Index> idx = independent_columns(src, tol);
  Matrix dom = select_columns(src, idx);
  Matrix val = select_columns(dst, idx);
  Matrix coeff = pinv(dom, tol) * src;
  const double mismatch = frob(val * coeff - dst);
  if (mismatch > tol.eq * (1.0 + frob(dst))) {
    fail(Errc::HypothesisViolated, std::string(what) + " is not well defined (residual " + std::to_string(mismatch) + ")");
  }
  return {std::move(dom), std::move(val)};
}

}  // namespace detail

/// Contraction X : H -> K with X S1 = S2 and T2 X = T1.
inline Matrix strong_parrott(const StrongParrottInstance& inst, const Tolerances& tol,
                             Endpoint endpoint = Endpoint::Min) {
  StrongParrottHypotheses h = check_strong_parrott(inst, tol);
  if (!h.ok()) fail(Errc::HypothesisViolated, h.describe_failures());
  const Index dim_h = inst.s1.rows(), dim_k = inst.s2.rows();

  // X0 on ran S1: S1 x |-> S2 x.  X1 on ran T2^*: T2^* y |-> T1^* y.
  auto [d1, v1] = detail::independent_restriction(inst.s1, inst.s2, "X0: S1 x -> S2 x", tol);
  Matrix t2a = inst.t2.adjoint();
  Matrix t1a = inst.t1.adjoint();
  auto [d2, v2] = detail::independent_restriction(t2a, t1a, "X1: T2^* y -> T1^* y", tol);

  ParrottInstance p;
  p.domain1 = std::move(d1);
  p.values1 = std::move(v1);
  p.domain2 = std::move(d2);
  p.values2 = std::move(v2);
  p.a1 = PsdMatrix::identity(dim_h);
  p.a2 = PsdMatrix::identity(dim_k);
  p.alpha1 = 1.0;
  p.alpha2 = 1.0;
  try {
    return parrott_complete(p, tol, endpoint);
  } catch (const Error& e) {
    if (e.code() == Errc::NotABounded || e.code() == Errc::IncompatibleInstance) {
      fail(Errc::HypothesisViolated, std::string("reduced instance rejected: ") + e.what());
    }
    throw;
  }
}

/// Contraction T : H -> K with T|_{H1} = T1 and P_{K1} T = T1'.
///
/// `t1_on_h1` is dim K x dim H1, column j the image of the j-th vector of
/// column_basis(p_h1). `t1_prime` is dim K1 x dim H in the coordinates of
/// column_basis(p_k1).
inline Matrix classical_parrott(const Matrix& p_h1, const Matrix& p_k1, const Matrix& t1_on_h1, const Matrix& t1_prime,
                                const Tolerances& tol) {
  for (const Matrix* m : {&p_h1, &p_k1, &t1_on_h1, &t1_prime}) require_finite(*m, "classical parrott data");
  if (!is_projector(p_h1, tol) || !is_projector(p_k1, tol)) {
    fail(Errc::NotProjector, "P_H1 and P_K1 must be orthogonal projections");
  }
  Matrix qh = column_basis(p_h1, tol);
  Matrix qk = column_basis(p_k1, tol);
  const Index dim_h = p_h1.rows(), dim_k = p_k1.rows();
  if (t1_on_h1.rows() != dim_k || t1_on_h1.cols() != qh.cols()) {
    fail(Errc::DimensionMismatch, "T1 must be dim K x dim H1");
  }
  if (t1_prime.rows() != qk.cols() || t1_prime.cols() != dim_h) {
    fail(Errc::DimensionMismatch, "T1' must be dim K1 x dim H");
  }
  std::string failures;
  if (spectral_norm(t1_on_h1) > 1.0 + tol.eq) failures += "T1 is not a contraction; ";
  if (spectral_norm(t1_prime) > 1.0 + tol.eq) failures += "T1' is not a contraction; ";
  Matrix lhs = qk.adjoint() * t1_on_h1;
  Matrix rhs = t1_prime * qh;
  if (frob(lhs - rhs) > tol.eq * (1.0 + frob(lhs) + frob(rhs))) failures += "P_K1 T1 != T1'|_H1; ";
  if (!failures.empty()) fail(Errc::HypothesisViolated, failures.substr(0, failures.size() - 2));

  ParrottInstance p;
  p.domain1 = qh;
  p.values1 = t1_on_h1;
  p.domain2 = qk;
  p.values2 = t1_prime.adjoint();
  p.a1 = PsdMatrix::identity(dim_h);
  p.a2 = PsdMatrix::identity(dim_k);
  p.alpha1 = 1.0;
  p.alpha2 = 1.0;
  return parrott_complete(p, tol);
}

}  // namespace opext
