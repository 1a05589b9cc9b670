#pragma once

// Hermitian extensions of symmetric functionals on left ideals of the matrix
// *-algebra M_m(C).
//
// Functionals are trace forms g(x) = tr(Phi x). Left ideals are M_m P for an
// orthogonal projection P. A positive functional f (PSD density F) gives the
// GNS space: the coordinate space C^{m^2} of M_m (column-major vec) with Gram
// <x, y>_f = tr(F y^* x), i.e. Gram matrix F^T (x) I_m, quotiented by its
// kernel through the Hilbert lift.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "opext/rng.hpp"
#include "opext/sa_ext.hpp"

namespace opext {

struct FunctionalMatrix {
  Matrix phi;

  Index algebra_dim() const noexcept { return phi.rows(); }
  Complex operator()(const Matrix& x) const { return (phi * x).trace(); }
};

inline Matrix matrix_unit(Index m, Index i, Index j) {
  Matrix e = Matrix::Zero(m, m);
  e(i, j) = 1.0;
  return e;
}

class LeftIdeal {
 public:
  LeftIdeal() = default;

  static LeftIdeal make(Matrix p, const Tolerances& tol) {
    require_finite(p, "ideal projection");
    require_square(p, "ideal projection");
    if (p.rows() == 0) fail(Errc::DimensionMismatch, "algebra size must be positive");
    if (!is_projector(p, tol)) fail(Errc::NotProjector, "P must satisfy P^2 = P = P^*");
    LeftIdeal ideal;
    ideal.basis_ = column_basis(p, tol);
    ideal.p_ = ideal.basis_ * ideal.basis_.adjoint();
    return ideal;
  }

  Index algebra_dim() const noexcept { return p_.rows(); }
  const Matrix& projector() const noexcept { return p_; }
  /// Orthonormal basis q_1..q_rho of ran P.
  const Matrix& range_basis() const noexcept { return basis_; }

  /// Basis {e_i q_j^*} of the ideal (dimension m * rank P).
  std::vector<Matrix> elements() const {
    std::vector<Matrix> out;
    const Index m = algebra_dim();
    for (Index j = 0; j < basis_.cols(); ++j) {
      for (Index i = 0; i < m; ++i) {
        Matrix a = Matrix::Zero(m, m);
        a.row(i) = basis_.col(j).adjoint();
        out.push_back(std::move(a));
      }
    }
    return out;
  }

 private:
  Matrix p_;
  Matrix basis_;
};

/// g0(a) = tr(Gamma a) for a in the ideal, with the canonical representative
/// Gamma = P Gamma (tr(Gamma a) = tr(P Gamma a) whenever a = a P).
class PartialFunctional {
 public:
  PartialFunctional() = default;

  static PartialFunctional make(LeftIdeal ideal, const Matrix& gamma) {
    require_finite(gamma, "Gamma");
    if (gamma.rows() != ideal.algebra_dim() || gamma.cols() != ideal.algebra_dim()) {
      fail(Errc::DimensionMismatch, "Gamma must be m x m");
    }
    PartialFunctional pf;
    pf.gamma_ = ideal.projector() * gamma;
    pf.ideal_ = std::move(ideal);
    return pf;
  }

  const LeftIdeal& ideal() const noexcept { return ideal_; }
  const Matrix& gamma() const noexcept { return gamma_; }
  Index algebra_dim() const noexcept { return ideal_.algebra_dim(); }
  Complex operator()(const Matrix& a) const { return (gamma_ * a).trace(); }

 private:
  LeftIdeal ideal_;
  Matrix gamma_;
};

/// g0(b^* a) = conj g0(a^* b) on the ideal basis.
inline bool is_symmetric_on_ideal(const PartialFunctional& pf, const Tolerances& tol) {
  std::vector<Matrix> el = pf.ideal().elements();
  const double bound = tol.eq * (1.0 + frob(pf.gamma()));
  for (const Matrix& a : el) {
    for (const Matrix& b : el) {
      if (std::abs(pf(b.adjoint() * a) - std::conj(pf(a.adjoint() * b))) > bound) return false;
    }
  }
  return true;
}

/// On M_m every positive functional is representable: |f(y^* x^* x y)| <=
/// ||x||^2 f(y^* y). The witnesses are M_x = ||E_ij||^2 = 1 on matrix units.
struct RepresentabilityReport {
  bool representable = true;
  Eigen::MatrixXd witness;
};

inline RepresentabilityReport check_representable(const PsdMatrix& f) {
  const Index m = f.dim();
  RepresentabilityReport rep;
  rep.witness = Eigen::MatrixXd::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) rep.witness(i, j) = std::pow(spectral_norm(matrix_unit(m, i, j)), 2);
  }
  return rep;
}

struct GnsSpace {
  PsdMatrix f;
  Index m = 0;
  HilbertLift lift;
  /// J^* 1, the class of the unit.
  Vector cyclic;

  Index dim() const noexcept { return lift.rank; }
  const PsdMatrix& gram() const noexcept { return lift.a; }

  /// J^* x.
  Vector coords(const Matrix& x) const { return lift.coords(vec(x)); }

  /// pi_f(x), defined by pi_f(x) J^* y = J^*(x y).
  Matrix pi(const Matrix& x) const {
    Matrix left = kron(Matrix::Identity(m, m), x);
    return lift.range_basis.adjoint() * lift.sqrt_a.matrix() * left * lift.pinv_sqrt_a * lift.range_basis;
  }

  Complex state(const Matrix& x) const { return (f.matrix() * x).trace(); }
};

inline GnsSpace gns(const PsdMatrix& f, const Tolerances& tol) {
  GnsSpace g;
  g.f = f;
  g.m = f.dim();
  Matrix gram = kron(f.matrix().transpose(), Matrix::Identity(g.m, g.m));
  g.lift = hilbert_lift(PsdMatrix::assume(HermitianMatrix::symmetrized(gram)), tol);
  g.cyclic = g.coords(Matrix::Identity(g.m, g.m));
  return g;
}

namespace detail {

// The operator a |-> a Gamma on the ideal, in vec coordinates:
// <S0 a, x> = x^* (a Gamma) = g0(x^* a).
inline SymmetricPartialOperator functional_operator(const PartialFunctional& pf, const Tolerances& tol) {
  std::vector<Matrix> el = pf.ideal().elements();
  const Index m = pf.algebra_dim();
  Matrix d(m * m, static_cast<Index>(el.size()));
  Matrix v(m * m, static_cast<Index>(el.size()));
  for (std::size_t j = 0; j < el.size(); ++j) {
    d.col(static_cast<Index>(j)) = vec(el[j]);
    v.col(static_cast<Index>(j)) = vec(el[j] * pf.gamma());
  }
  Tolerances sym_tol = tol;
  sym_tol.herm = std::max(tol.herm, tol.eq);
  return SymmetricPartialOperator::make(std::move(d), std::move(v), sym_tol);
}

inline LiftedSymmetric lift_functional(const PartialFunctional& pf, const GnsSpace& space, const Tolerances& tol) {
  if (space.m != pf.algebra_dim()) fail(Errc::DimensionMismatch, "functional and f live on different algebras");
  if (!is_symmetric_on_ideal(pf, tol)) fail(Errc::NotSymmetric, "g0(b^* a) != conj g0(a^* b) on the ideal");
  try {
    return lift_symmetric(functional_operator(pf, tol), space.gram(), tol);
  } catch (const Error& e) {
    if (e.code() == Errc::NotABounded) fail(Errc::NotFBounded, std::string("g0 is not f-bounded: ") + e.what());
    throw;
  }
}

// Reads off the density of x |-> <S J^* x, J^* 1>_f.
inline Matrix density_of(const GnsSpace& space, const Matrix& s) {
  const Index m = space.m;
  if (space.dim() == 0) return Matrix::Zero(m, m);
  Matrix jstar = space.lift.range_basis.adjoint() * space.lift.sqrt_a.matrix();  // r x m^2
  Matrix row = space.cyclic.adjoint() * s * jstar;                              // g(E_ij) at i + j m
  Matrix phi(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) phi(j, i) = row(0, i + j * m);
  }
  return phi;
}

}  // namespace detail

/// The f-bound alpha_f(g0): smallest alpha with
/// |g0(x^* a)|^2 <= alpha^2 f(x^* x) f(a^* a).
inline double f_bound(const PartialFunctional& pf, const PsdMatrix& f, const Tolerances& tol) {
  return detail::lift_functional(pf, gns(f, tol), tol).alpha;
}

struct FunctionalExtension {
  FunctionalMatrix g_min;
  FunctionalMatrix g_max;
  double alpha = 0.0;
  GnsSpace space;
  /// Extremal extensions of S0 as operators on the GNS space.
  ExtensionInterval hilbert;
};

inline FunctionalExtension extend_functional(const PartialFunctional& pf, const PsdMatrix& f, const Tolerances& tol) {
  FunctionalExtension out;
  out.space = gns(f, tol);
  LiftedSymmetric ls = detail::lift_functional(pf, out.space, tol);
  out.alpha = ls.alpha;
  const Index r = out.space.dim();
  const Index m = pf.algebra_dim();
  if (r == 0) {
    out.hilbert.s_min = out.hilbert.s_max = HermitianMatrix::zero(0);
    out.hilbert.lifted_min = out.hilbert.lifted_max = HermitianMatrix::zero(0);
    out.g_min.phi = out.g_max.phi = Matrix::Zero(m, m);
    return out;
  }
  out.hilbert = extend_symmetric(ls.hilbert_operator(tol), PsdMatrix::identity(r), tol);
  auto hermitian_density = [&](const HermitianMatrix& s) {
    Matrix phi = detail::density_of(out.space, s.matrix());
    try {
      return hermitize(phi, tol).matrix();
    } catch (const Error& e) {
      fail(Errc::NumericalFailure, std::string("extended functional is not hermitian: ") + e.what());
    }
  };
  out.g_min.phi = hermitian_density(out.hilbert.s_min);
  out.g_max.phi = hermitian_density(out.hilbert.s_max);
  return out;
}

/// g_min <= g <= g_max, where g <= g' means g' - g is a positive functional
/// (PSD density difference).
inline bool functional_interval_member(const FunctionalMatrix& g, const FunctionalMatrix& g_min,
                                       const FunctionalMatrix& g_max, const Tolerances& tol) {
  if (g.phi.rows() != g_min.phi.rows() || g.phi.rows() != g_max.phi.rows()) {
    fail(Errc::DimensionMismatch, "functionals live on different algebras");
  }
  HermitianMatrix h = hermitize(g.phi, tol);
  HermitianMatrix lo = hermitize(g_min.phi, tol);
  HermitianMatrix hi = hermitize(g_max.phi, tol);
  return loewner_leq(lo, h, tol) && loewner_leq(h, hi, tol);
}

struct HahnJordan {
  FunctionalMatrix positive;
  FunctionalMatrix negative;
};

/// Spectral split Phi = Phi+ - Phi- with Phi+ Phi- = 0, both PSD.
inline HahnJordan hahn_jordan(const FunctionalMatrix& g, const Tolerances& tol) {
  HermitianMatrix h = hermitize(g.phi, tol);
  Eigh e = h.eigh();
  RealVector pos = e.values.cwiseMax(0.0);
  RealVector neg = (-e.values).cwiseMax(0.0);
  HahnJordan out;
  out.positive.phi = e.vectors * pos.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  out.negative.phi = e.vectors * neg.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  out.positive.phi = (out.positive.phi + out.positive.phi.adjoint()).eval() / 2.0;
  out.negative.phi = (out.negative.phi + out.negative.phi.adjoint()).eval() / 2.0;
  return out;
}

struct CStarOptions {
  std::optional<Matrix> f;          // candidate dominating density
  std::optional<Matrix> extension;  // a known hermitian extension for the necessity check
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
};

struct NecessityReport {
  FunctionalMatrix g;
  HahnJordan parts;
  Matrix f;                    // g+ + g-
  double stated_constant = 4.0;
  double measured_constant = 0.0;  // sup |g0(x^*a)|^2 / (f(x^*x) f(a^*a)) over samples
  double exact_constant = std::numeric_limits<double>::quiet_NaN();  // alpha_f(g0)^2, spectral
  std::size_t samples = 0;
  std::size_t skipped = 0;
  std::size_t violations = 0;
};

struct CStarDecision {
  bool extendible = false;
  bool f_searched = false;  // true when the witness f was not supplied by the caller
  Matrix f;
  FunctionalExtension extension;
  NecessityReport necessity;
};

/// Sufficiency: a symmetric, f-bounded g0 extends to g_min/g_max. Necessity:
/// for a hermitian extension g with Hahn-Jordan parts g+, g-, g0 is bounded by
/// f = g+ + g- with constant 4 (checked on random pairs).
inline CStarDecision cstar_extendibility(const PartialFunctional& pf, const Tolerances& tol,
                                         const CStarOptions& opts = {}) {
  if (!is_symmetric_on_ideal(pf, tol)) {
    fail(Errc::NotSymmetric, "g0 is not symmetric on the ideal, so no hermitian extension exists");
  }
  const Index m = pf.algebra_dim();
  CStarDecision out;
  bool done = false;
  if (opts.f) {
    try {
      out.f = opts.f->matrix();
      out.extension = extend_functional(pf, make_psd(out.f, tol), tol);
      done = true;
    } catch (const Error& e) {
      if (e.code() != Errc::NotFBounded) throw;
    }
  }
  if (!done) {
    // The trace is faithful, so every symmetric g0 is trace-bounded on M_m.
    out.f = Matrix::Identity(m, m);
    out.f_searched = true;
    out.extension = extend_functional(pf, PsdMatrix::identity(m), tol);
  }
  out.extendible = true;

  NecessityReport& nec = out.necessity;
  nec.g.phi = opts.extension ? *opts.extension : out.extension.g_min.phi;
  if (nec.g.phi.rows() != m || nec.g.phi.cols() != m) fail(Errc::DimensionMismatch, "extension must be m x m");
  hermitize(nec.g.phi, tol);
  for (const Matrix& a : pf.ideal().elements()) {
    if (std::abs(nec.g(a) - pf(a)) > tol.eq * (1.0 + frob(nec.g.phi) + frob(pf.gamma()))) {
      fail(Errc::HypothesisViolated, "supplied functional does not extend g0");
    }
  }
  nec.parts = hahn_jordan(nec.g, tol);
  nec.f = nec.parts.positive.phi + nec.parts.negative.phi;

  Rng rng(opts.seed);
  const Matrix& p = pf.ideal().projector();
  const double fnorm = spectral_norm(nec.f);
  const double gnorm = frob(pf.gamma());
  for (std::size_t s = 0; s < opts.samples; ++s) {
    Matrix x = rng.gaussian(m, m);
    Matrix a = rng.gaussian(m, m) * p;
    const double fxx = (nec.f * x.adjoint() * x).trace().real();
    const double faa = (nec.f * a.adjoint() * a).trace().real();
    ++nec.samples;
    const double xx = x.squaredNorm(), aa = a.squaredNorm();
    if (fxx < tol.eq * fnorm * xx || faa < tol.eq * fnorm * aa) {
      ++nec.skipped;
      continue;
    }
    const double lhs = std::norm(pf(x.adjoint() * a));
    const double prod = fxx * faa;
    nec.measured_constant = std::max(nec.measured_constant, lhs / prod);
    if (lhs > nec.stated_constant * prod * (1.0 + tol.eq) + tol.eq * gnorm * gnorm * xx * aa) ++nec.violations;
  }
  try {
    const double a = f_bound(pf, PsdMatrix::assume(HermitianMatrix::symmetrized(nec.f)), tol);
    nec.exact_constant = a * a;
  } catch (const Error&) {
    nec.exact_constant = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace opext
