#pragma once

// Independent verifiers and constructive instance generators.
//
// The verifiers here only use the numkit primitives (pinv, eigen/singular
// values); they never go through the lift or extension code they check.

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "opext/func_ext.hpp"
#include "opext/kvn.hpp"
#include "opext/parrott.hpp"
#include "opext/rng.hpp"
#include "opext/sa_ext.hpp"

namespace opext::oracle {

namespace detail {

// Empirical sup of |y^* V c| / sqrt(<A Dc, Dc> <A y, y>).
//
// Every `restart_period` evaluations a fresh complex Gaussian pair is drawn;
// the evaluations in between move one side of the pair to its Cauchy-Schwarz
// maximiser for the other side fixed (y <- A^+ V c, c <- (D^*AD)^+ V^* y),
// renormalised after each step.
// The schedule does not depend on `samples`, so the result is nondecreasing
// in `samples` for a fixed seed, and every value is an attained quotient.
inline double sampled_quotient(const Matrix& d, const Matrix& v, const Matrix& a, std::size_t samples, Rng& rng,
                               const Tolerances& tol) {
  constexpr std::size_t restart_period = 64;
  const Index n = d.rows(), k = d.cols();
  if (k == 0 || n == 0) return 0.0;
  const Matrix gram = d.adjoint() * a * d;
  const Matrix gram_pinv = pinv(gram, tol);
  const Matrix a_pinv = pinv(a, tol);
  const double gram_norm = spectral_norm(gram);
  const double a_norm = spectral_norm(a);
  Vector c, y;
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t phase = s % restart_period;
    if (phase == 0) {
      c = rng.gaussian(k, 1);
      y = rng.gaussian(n, 1);
    } else if (phase % 2 == 1) {
      y = a_pinv * (v * c);
    } else {
      c = gram_pinv * (v.adjoint() * y);
    }
    const double cn = c.norm(), yn = y.norm();
    if (cn == 0.0 || yn == 0.0) continue;
    c /= cn;
    y /= yn;
    const double qx = c.dot(gram * c).real();
    const double qy = y.dot(a * y).real();
    if (qx <= tol.eq * gram_norm * c.squaredNorm() || qy <= tol.eq * a_norm * y.squaredNorm()) continue;
    const double ratio = std::abs(y.dot(v * c)) / std::sqrt(qx * qy);
    if (std::isfinite(ratio)) best = std::max(best, ratio);
  }
  return best;
}

}  // namespace detail

inline double sampled_bound(const SymmetricPartialOperator& s0, const PsdMatrix& a, std::size_t samples, Rng& rng,
                            const Tolerances& tol = {}) {
  return detail::sampled_quotient(s0.domain(), s0.values(), a.matrix(), samples, rng, tol);
}

inline double sampled_bound(const HermitianMatrix& s, const PsdMatrix& a, std::size_t samples, Rng& rng,
                            const Tolerances& tol = {}) {
  return detail::sampled_quotient(Matrix::Identity(s.dim(), s.dim()), s.matrix(), a.matrix(), samples, rng, tol);
}

struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct SearchResult {
  std::vector<double> params;
  double value = 0.0;
};

using Family = std::function<Matrix(const std::vector<double>&)>;
using Constraint = std::function<bool(const Matrix&)>;
using Objective = std::function<double(const std::vector<double>&, const Matrix&)>;

/// Two-stage grid search (coarse grid with an odd point count per axis, then
/// the same grid over the best cell) for the feasible minimiser of a <= 3-parameter matrix family.
inline SearchResult min_completion_search(const Family& family, const Constraint& constraint,
                                          const Objective& objective, const std::vector<ParamRange>& box,
                                          std::size_t grid_points = 1000) {
  const std::size_t dims = box.size();
  if (dims == 0 || dims > 3) fail(Errc::InvalidDims, "min_completion_search supports 1 to 3 parameters");
  auto per_dim = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(grid_points), 1.0 / dims) + 1e-9)));
  if (per_dim % 2 == 0) ++per_dim;

  bool found = false;
  SearchResult best;
  std::vector<double> step(dims);

  auto scan = [&](const std::vector<ParamRange>& region) {
    const auto last = static_cast<double>(per_dim - 1);
    for (std::size_t d = 0; d < dims; ++d) step[d] = (region[d].hi - region[d].lo) / last;
    std::vector<std::size_t> idx(dims, 0);
    std::vector<double> p(dims);
    while (true) {
      for (std::size_t d = 0; d < dims; ++d) {
        const double t = static_cast<double>(idx[d]) / last;
        p[d] = (1.0 - t) * region[d].lo + t * region[d].hi;
      }
      Matrix m = family(p);
      if (constraint(m)) {
        const double val = objective(p, m);
        if (!found || val < best.value) {
          best = {p, val};
          found = true;
        }
      }
      std::size_t d = 0;
      while (d < dims && ++idx[d] == per_dim) idx[d++] = 0;
      if (d == dims) break;
    }
  };

  scan(box);
  if (!found) fail(Errc::Infeasible, "no grid point satisfies the constraint");
  std::vector<ParamRange> zoom(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    zoom[d].lo = std::max(box[d].lo, best.params[d] - step[d]);
    zoom[d].hi = std::min(box[d].hi, best.params[d] + step[d]);
  }
  scan(zoom);
  return best;
}

// ---------------------------------------------------------------------------
// Instance generators. Each builds its instance around a hidden object so the
// hypotheses of the construction hold exactly (up to rounding).

struct KvnInstance {
  PartialPositiveOperator op;
  PsdMatrix hidden;  // B with G = B D
};

struct SaExtInstance {
  SymmetricPartialOperator s0;
  PsdMatrix a;
  HermitianMatrix hidden;  // S with V = S D, ran S ⊆ ran A
};

struct FunctionalInstance {
  PartialFunctional pf;
  PsdMatrix f;
  FunctionalMatrix hidden;  // a hermitian extension of g0
};

struct StrongParrottCase {
  StrongParrottInstance inst;
  Matrix hidden;  // contraction X with X S1 = S2, T2 X = T1
};

struct ParrottCase {
  ParrottInstance inst;
  Matrix hidden;  // T with T1 ⊆ T, T2 ⊆ T^*
};

/// Hilbert-space instance with a Hermitian B that leaves dom S0 invariant and
/// satisfies B S0 ⊆ S0 B.
struct CommutingInstance {
  SymmetricPartialOperator s0;
  HermitianMatrix b;
  HermitianMatrix hidden;
};

enum class InstanceKind { Kvn, SaExt, Parrott, StrongParrott, Functional };

using Instance = std::variant<KvnInstance, SaExtInstance, ParrottCase, StrongParrottCase, FunctionalInstance>;

inline constexpr Index kMaxAmbient = 16;
inline constexpr Index kMaxAlgebra = 4;

inline Matrix random_hermitian(Index n, Rng& rng) {
  Matrix g = rng.gaussian(n, n);
  return (g + g.adjoint()) / 2.0;
}

inline Matrix random_unitary(Index n, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(rng.gaussian(n, n));
  return qr.householderQ() * Matrix::Identity(n, n);
}

/// Random contraction; half of the time its norm is exactly 1.
inline Matrix random_contraction(Index rows, Index cols, Rng& rng) {
  if (rows == 0 || cols == 0) return Matrix::Zero(rows, cols);
  Eigen::JacobiSVD<Matrix> svd(rng.gaussian(rows, cols), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Index p = svd.singularValues().size();
  RealVector s(p);
  for (Index i = 0; i < p; ++i) s(i) = rng.uniform();
  if (rng.uniform() < 0.5) s(0) = 1.0;
  return svd.matrixU() * s.cast<Complex>().asDiagonal() * svd.matrixV().adjoint();
}

namespace detail {

inline void check_dim(Index v, Index lo, Index hi, const char* what) {
  if (v < lo || v > hi) {
    fail(Errc::InvalidDims, std::string(what) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                "], got " + std::to_string(v));
  }
}

inline Index dim_or_random(std::span<const Index> dims, std::size_t i, Index lo, Index hi, Rng& rng, const char* what) {
  if (i < dims.size()) {
    check_dim(dims[i], lo, hi, what);
    return dims[i];
  }
  return static_cast<Index>(rng.uniform_int(lo, hi));
}

}  // namespace detail

inline KvnInstance random_kvn(std::span<const Index> dims, Rng& rng, const Tolerances& tol = {}) {
  if (dims.size() > 2) fail(Errc::InvalidDims, "kvn takes dims n[,k]");
  const Index n = detail::dim_or_random(dims, 0, 1, kMaxAmbient, rng, "n");
  const Index k = detail::dim_or_random(dims, 1, 1, n, rng, "k");
  const Index rank = static_cast<Index>(rng.uniform_int(1, n));
  KvnInstance out;
  out.hidden = PsdMatrix::gram(rng.gaussian(n, rank));
  Matrix d = rng.gaussian(n, k);
  out.op = PartialPositiveOperator::make(d, out.hidden.matrix() * d, tol);
  return out;
}

inline SaExtInstance random_sa_ext(std::span<const Index> dims, Rng& rng, const Tolerances& tol = {}) {
  if (dims.size() > 2) fail(Errc::InvalidDims, "sa-ext takes dims n[,k]");
  const Index n = detail::dim_or_random(dims, 0, 1, kMaxAmbient, rng, "n");
  const Index k = detail::dim_or_random(dims, 1, 1, n, rng, "k");
  SaExtInstance out;
  if (rng.uniform() < 0.25) {
    out.a = PsdMatrix::identity(n);
    out.hidden = HermitianMatrix::symmetrized(random_hermitian(n, rng));
  } else {
    const Index rank = static_cast<Index>(rng.uniform_int(1, n));
    Matrix r = rng.gaussian(n, rank);
    out.a = PsdMatrix::gram(r);
    out.hidden = HermitianMatrix::symmetrized(r * random_hermitian(rank, rng) * r.adjoint());
  }
  Matrix d = rng.gaussian(n, k);
  Matrix v = out.hidden.matrix() * d;
  Tolerances sym = tol;
  sym.herm = std::max(tol.herm, tol.eq);
  out.s0 = SymmetricPartialOperator::make(d, v, sym);
  return out;
}

inline ParrottCase random_parrott(std::span<const Index> dims, Rng& rng, const Tolerances& tol = {}) {
  (void)tol;
  if (dims.size() > 2) fail(Errc::InvalidDims, "parrott takes dims n1,n2");
  const Index n1 = detail::dim_or_random(dims, 0, 1, kMaxAmbient / 2, rng, "n1");
  const Index n2 = detail::dim_or_random(dims, 1, 1, kMaxAmbient / 2, rng, "n2");
  const Index r1 = static_cast<Index>(rng.uniform_int(1, n1));
  const Index r2 = static_cast<Index>(rng.uniform_int(1, n2));
  Matrix f1 = rng.gaussian(n1, r1);
  Matrix f2 = rng.gaussian(n2, r2);
  ParrottCase out;
  out.hidden = f2 * random_contraction(r2, r1, rng) * f1.adjoint();
  const Index k1 = static_cast<Index>(rng.uniform_int(0, n1));
  const Index k2 = static_cast<Index>(rng.uniform_int(0, n2));
  ParrottInstance& p = out.inst;
  p.a1 = PsdMatrix::gram(f1);
  p.a2 = PsdMatrix::gram(f2);
  p.domain1 = rng.gaussian(n1, k1);
  p.values1 = out.hidden * p.domain1;
  p.domain2 = rng.gaussian(n2, k2);
  p.values2 = out.hidden.adjoint() * p.domain2;
  p.alpha1 = 1.0 + std::floor(4.0 * rng.uniform()) / 4.0;
  p.alpha2 = 1.0 + std::floor(4.0 * rng.uniform()) / 4.0;
  return out;
}

inline StrongParrottCase random_strong_parrott(std::span<const Index> dims, Rng& rng) {
  if (dims.size() > 4) fail(Errc::InvalidDims, "strong-parrott takes dims h,k,p[,q]");
  const Index h = detail::dim_or_random(dims, 0, 1, kMaxAmbient / 2, rng, "dim H");
  const Index k = detail::dim_or_random(dims, 1, 1, kMaxAmbient / 2, rng, "dim K");
  const Index p = detail::dim_or_random(dims, 2, 1, kMaxAmbient / 2, rng, "dim E1");
  const Index q = dims.size() > 3 ? detail::dim_or_random(dims, 3, 1, kMaxAmbient / 2, rng, "dim F2") : p;
  StrongParrottCase out;
  out.hidden = random_contraction(k, h, rng);
  out.inst.s1 = rng.gaussian(h, p);
  out.inst.s2 = out.hidden * out.inst.s1;
  out.inst.t2 = rng.gaussian(q, k);
  out.inst.t1 = out.inst.t2 * out.hidden;
  return out;
}

inline FunctionalInstance random_functional(std::span<const Index> dims, Rng& rng, const Tolerances& tol = {}) {
  if (dims.size() > 1) fail(Errc::InvalidDims, "functional takes dims m");
  const Index m = detail::dim_or_random(dims, 0, 1, kMaxAlgebra, rng, "m");
  const Index rf = static_cast<Index>(rng.uniform_int(1, m));
  const Index rp = static_cast<Index>(rng.uniform_int(1, m));
  Matrix r = rng.gaussian(m, rf);
  FunctionalInstance out;
  out.f = PsdMatrix::gram(r);
  out.hidden.phi = r * random_hermitian(rf, rng) * r.adjoint();
  out.hidden.phi = (out.hidden.phi + out.hidden.phi.adjoint()).eval() / 2.0;
  Eigen::HouseholderQR<Matrix> qr(rng.gaussian(m, rp));
  Matrix q = qr.householderQ() * Matrix::Identity(m, rp);
  out.pf = PartialFunctional::make(LeftIdeal::make(q * q.adjoint(), tol), out.hidden.phi);
  return out;
}

inline Instance random_instance(InstanceKind kind, std::span<const Index> dims, Rng& rng, const Tolerances& tol = {}) {
  switch (kind) {
    case InstanceKind::Kvn: return random_kvn(dims, rng, tol);
    case InstanceKind::SaExt: return random_sa_ext(dims, rng, tol);
    case InstanceKind::Parrott: return random_parrott(dims, rng, tol);
    case InstanceKind::StrongParrott: return random_strong_parrott(dims, rng);
    case InstanceKind::Functional: return random_functional(dims, rng, tol);
  }
  fail(Errc::InvalidDims, "unknown instance kind");
}

inline CommutingInstance random_commuting(Index n, Rng& rng, const Tolerances& tol = {}) {
  detail::check_dim(n, 1, kMaxAmbient, "n");
  Matrix z = random_unitary(n, rng);
  // Partition C^n into eigenspaces of B; S is block diagonal over them, and
  // dom S0 takes a random subspace of each eigenspace.
  Matrix s = Matrix::Zero(n, n);
  RealVector b(n);
  std::vector<Matrix> dom_parts;
  Index start = 0, block = 0;
  while (start < n) {
    const Index len = std::min<Index>(n - start, static_cast<Index>(rng.uniform_int(1, 3)));
    Matrix zb = z.middleCols(start, len);
    s += zb * random_hermitian(len, rng) * zb.adjoint();
    for (Index i = 0; i < len; ++i) b(start + i) = static_cast<double>(block + 1);
    const Index take = static_cast<Index>(rng.uniform_int(0, len));
    if (take > 0) dom_parts.push_back(zb * rng.gaussian(len, take));
    start += len;
    ++block;
  }
  if (dom_parts.empty()) dom_parts.push_back(z.col(0));
  Index k = 0;
  for (const Matrix& part : dom_parts) k += part.cols();
  Matrix d(n, k);
  Index at = 0;
  for (const Matrix& part : dom_parts) {
    d.middleCols(at, part.cols()) = part;
    at += part.cols();
  }
  CommutingInstance out;
  out.hidden = HermitianMatrix::symmetrized(s);
  out.b = HermitianMatrix::symmetrized(z * b.cast<Complex>().asDiagonal() * z.adjoint());
  Tolerances sym = tol;
  sym.herm = std::max(tol.herm, tol.eq);
  out.s0 = SymmetricPartialOperator::make(d, out.hidden.matrix() * d, sym);
  return out;
}

}  // namespace opext::oracle
