#include <gtest/gtest.h>

#include "opext/oracle.hpp"
#include "opext/parrott.hpp"
#include "support.hpp"

using namespace opext;
using namespace opext::testing;

namespace {

const Tolerances tol;

ParrottInstance scalar(double t2 = 1.0, double alpha = 1.0) {
  ParrottInstance p;
  p.domain1 = mat({{1}});
  p.values1 = mat({{1}});
  p.domain2 = mat({{1}});
  p.values2 = mat({{t2}});
  p.a1 = PsdMatrix::identity(1);
  p.a2 = PsdMatrix::identity(1);
  p.alpha1 = p.alpha2 = alpha;
  return p;
}

ParrottInstance empty(Index n1, Index n2, double alpha) {
  ParrottInstance p;
  p.domain1 = Matrix(n1, 0);
  p.values1 = Matrix(n2, 0);
  p.domain2 = Matrix(n2, 0);
  p.values2 = Matrix(n1, 0);
  p.a1 = PsdMatrix::identity(n1);
  p.a2 = PsdMatrix::identity(n2);
  p.alpha1 = p.alpha2 = alpha;
  return p;
}

// H = K = C^2, T1 e1 = e2 on H1 = span e1, and the row T1' = [0 1] into
// K1 = span e1, i.e. T2 e1 = T1'^* e1 = e2.
ParrottInstance classical() {
  ParrottInstance p;
  p.domain1 = e(2, 0);
  p.values1 = e(2, 1);
  p.domain2 = e(2, 0);
  p.values2 = e(2, 1);
  p.a1 = PsdMatrix::identity(2);
  p.a2 = PsdMatrix::identity(2);
  p.alpha1 = p.alpha2 = 1.0;
  return p;
}

const Matrix swap2 = mat({{0, 1}, {1, 0}});

}  // namespace

TEST(Compatibility, Examples) {
  EXPECT_TRUE(check_compatibility(empty(2, 3, 1.0), tol));
  EXPECT_TRUE(check_compatibility(scalar(), tol));
  EXPECT_FALSE(check_compatibility(scalar(2.0), tol));
}

TEST(AssembleSymmetric, EmptyDomains) {
  ProductSystem sys = assemble_symmetric(empty(2, 3, 1.0), tol);
  EXPECT_EQ(sys.s0.domain_dim(), 0);
  EXPECT_TRUE(near(sys.lambda.matrix(), Matrix::Identity(5, 5), 0.0));
}

TEST(AssembleSymmetric, ClassicalInstance) {
  ProductSystem sys = assemble_symmetric(classical(), tol);
  Matrix d(4, 2), v(4, 2);
  d << e(4, 0), e(4, 2);
  v << e(4, 3), e(4, 1);
  EXPECT_TRUE(near(sys.s0.domain(), d, 0.0));
  EXPECT_TRUE(near(sys.s0.values(), v, 0.0));
}

TEST(AssembleSymmetric, ScalarInstanceSwapsCoordinates) {
  ProductSystem sys = assemble_symmetric(scalar(), tol);
  EXPECT_TRUE(near(sys.s0.domain(), Matrix::Identity(2, 2), 0.0));
  EXPECT_TRUE(near(sys.s0.values(), swap2, 0.0));
  EXPECT_EQ(sys.alpha, 1.0);
}

TEST(AssembleSymmetric, RejectsIncompatible) {
  try {
    assemble_symmetric(scalar(2.0), tol);
    FAIL() << "expected IncompatibleInstance";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::IncompatibleInstance);
  }
}

TEST(ParrottComplete, Examples) {
  EXPECT_TRUE(near(parrott_complete(empty(2, 2, 0.0), tol), Matrix::Zero(2, 2), 1e-12));
  EXPECT_TRUE(near(parrott_complete(scalar(), tol), mat({{1}}), 1e-12));
  for (Endpoint ep : {Endpoint::Min, Endpoint::Max, Endpoint::Mid}) {
    EXPECT_TRUE(near(parrott_complete(classical(), tol, ep), swap2, 1e-8));
  }
}

TEST(ParrottComplete, ClassicalMatchesHandComputation) {
  // With Lambda = I and alpha = 1: G = alpha U + W has columns e1 + e4 and
  // e3 + e2, M = U^* G = I, so the minimal positive extension is G G^*.
  ProductSystem sys = assemble_symmetric(classical(), tol);
  ExtensionInterval iv = extend_symmetric(sys.s0, sys.lambda, tol);
  Matrix g(4, 2);
  g << e(4, 0) + e(4, 3), e(4, 2) + e(4, 1);
  EXPECT_NEAR(iv.alpha, 1.0, 1e-12);
  EXPECT_TRUE(near(iv.s_min.matrix() + Matrix::Identity(4, 4), g * g.adjoint(), 1e-8));
}

TEST(ParrottComplete, ForcedEntryMatchesGridSearch) {
  oracle::SearchResult best = oracle::min_completion_search(
      [](const std::vector<double>& p) { return mat({{0, 1}, {1, p[0]}}); },
      [](const Matrix& m) { return spectral_norm(m) <= 1.0 + 1e-12; },
      [](const std::vector<double>& p, const Matrix&) { return std::abs(p[0]); }, {{-2.0, 2.0}});
  EXPECT_NEAR(best.params[0], 0.0, 1e-5);
  EXPECT_NEAR(std::abs(parrott_complete(classical(), tol)(1, 1)), best.params[0], 1e-5);
}

TEST(ParrottComplete, RejectsSmallAlphas) {
  try {
    parrott_complete(scalar(1.0, 0.5), tol);
    FAIL() << "expected NotABounded";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::NotABounded);
  }
}

TEST(ParrottComplete, RandomInstances) {
  Rng rng(30);
  for (int trial = 0; trial < 200; ++trial) {
    oracle::ParrottCase c = oracle::random_parrott({}, rng);
    const ParrottInstance& p = c.inst;
    ASSERT_TRUE(check_compatibility(p, tol));
    for (Endpoint ep : {Endpoint::Min, Endpoint::Max, Endpoint::Mid}) {
      Matrix t = parrott_complete(p, tol, ep);
      const double tn = spectral_norm(t);
      EXPECT_LE(frob(t * p.domain1 - p.values1), tol.eq * (1.0 + frob(p.values1) + tn * frob(p.domain1)));
      EXPECT_LE(frob(t.adjoint() * p.domain2 - p.values2), tol.eq * (1.0 + frob(p.values2) + tn * frob(p.domain2)));
      EXPECT_LE(completion_bound_sq(t, p.a1, p.a2, tol), std::max(p.alpha1, p.alpha2) + 1e-7);
    }
  }
}

TEST(StrongParrott, Examples) {
  StrongParrottInstance one{mat({{1}}), mat({{1}}), mat({{1}}), mat({{1}})};
  EXPECT_TRUE(near(strong_parrott(one, tol), mat({{1}}), 1e-12));

  Rng rng(31);
  Matrix c = oracle::random_contraction(3, 2, rng);
  StrongParrottInstance full{Matrix::Identity(2, 2), c, Matrix::Zero(1, 2), Matrix::Zero(1, 3)};
  EXPECT_TRUE(near(strong_parrott(full, tol), c, 1e-10));

  StrongParrottInstance zero{rng.gaussian(3, 2), Matrix::Zero(2, 2), Matrix::Zero(2, 3), rng.gaussian(2, 2)};
  Matrix x = strong_parrott(zero, tol);
  EXPECT_TRUE(near(x, Matrix::Zero(2, 3), 1e-10));
}

TEST(StrongParrott, RejectsViolatedHypotheses) {
  StrongParrottInstance bad{mat({{1}}), mat({{2}}), mat({{2}}), mat({{1}})};
  StrongParrottHypotheses h = check_strong_parrott(bad, tol);
  EXPECT_TRUE(h.intertwining);
  EXPECT_FALSE(h.domain_order);
  EXPECT_FALSE(h.range_order);
  try {
    strong_parrott(bad, tol);
    FAIL() << "expected HypothesisViolated";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::HypothesisViolated);
  }
}

TEST(StrongParrott, GeneratedInstancePassesHypotheses) {
  Rng rng(7);
  std::vector<Index> dims{2, 2, 2};
  oracle::StrongParrottCase c = oracle::random_strong_parrott(dims, rng);
  EXPECT_TRUE(check_strong_parrott(c.inst, tol).ok());
}

TEST(StrongParrott, RandomInstances) {
  Rng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    oracle::StrongParrottCase c = oracle::random_strong_parrott({}, rng);
    const StrongParrottInstance& in = c.inst;
    Matrix x = strong_parrott(in, tol);
    EXPECT_LE(spectral_norm(x), 1.0 + 1e-8);
    EXPECT_LE(frob(x * in.s1 - in.s2), 1e-7 * (1.0 + spectral_norm(in.s1)));
    EXPECT_LE(frob(in.t2 * x - in.t1), 1e-7 * (1.0 + spectral_norm(in.t2)));
  }
}

TEST(ClassicalParrott, Examples) {
  Rng rng(33);
  Matrix t = oracle::random_contraction(3, 3, rng);
  Matrix id = Matrix::Identity(3, 3);
  EXPECT_TRUE(near(classical_parrott(id, id, t, t, tol), t, 1e-10));

  Matrix p = diag({1, 0});
  EXPECT_TRUE(near(classical_parrott(p, p, mat({{0}, {1}}), mat({{0, 1}}), tol), swap2, 1e-8));
  EXPECT_TRUE(near(classical_parrott(p, p, Matrix::Zero(2, 1), Matrix::Zero(1, 2), tol), Matrix::Zero(2, 2), 1e-12));
}

TEST(ClassicalParrott, RejectsNonContraction) {
  Matrix p = diag({1, 0});
  try {
    classical_parrott(p, p, mat({{0}, {2}}), mat({{0, 2}}), tol);
    FAIL() << "expected HypothesisViolated";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::HypothesisViolated);
  }
}

TEST(ClassicalParrott, RoundTripOnRandomSubspaces) {
  Rng rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    const Index h = rng.uniform_int(1, 10), k = rng.uniform_int(1, 10);
    Matrix t = oracle::random_contraction(k, h, rng);
    auto projector = [&](Index n) {
      Eigen::HouseholderQR<Matrix> qr(rng.gaussian(n, n));
      Matrix q = qr.householderQ() * Matrix::Identity(n, rng.uniform_int(1, n));
      return Matrix(q * q.adjoint());
    };
    Matrix ph = projector(h), pk = projector(k);
    Matrix qh = column_basis(ph, tol), qk = column_basis(pk, tol);
    Matrix out = classical_parrott(ph, pk, t * qh, qk.adjoint() * t, tol);
    EXPECT_LE(spectral_norm(out), 1.0 + 1e-8);
    EXPECT_LE(frob(out * qh - t * qh), 1e-7);
    EXPECT_LE(frob(qk.adjoint() * out - qk.adjoint() * t), 1e-7);
  }
}
