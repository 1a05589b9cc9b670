#include <cmath>

#include <gtest/gtest.h>

#include "opext/error.hpp"
#include "opext/numkit.hpp"
#include "opext/rng.hpp"
#include "support.hpp"

using namespace opext;
using namespace opext::testing;

namespace {

const Tolerances tol;

HermitianMatrix herm(const Matrix& m) { return HermitianMatrix::symmetrized(m); }

}  // namespace

TEST(Pinv, ScalarInverse) { EXPECT_TRUE(near(pinv(mat({{2.0}}), tol), mat({{0.5}}), 1e-15)); }

TEST(Pinv, ZeroMapsToZero) { EXPECT_TRUE(near(pinv(Matrix::Zero(2, 2), tol), Matrix::Zero(2, 2), 0.0)); }

TEST(Pinv, ProjectionIsItsOwnPseudoInverse) {
  EXPECT_TRUE(near(pinv(diag({1, 0}), tol), diag({1, 0}), 1e-15));
}

TEST(Pinv, PenroseIdentitiesOnRandomMatrices) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Index r = rng.uniform_int(1, 16), c = rng.uniform_int(1, 16), k = rng.uniform_int(1, std::min(r, c));
    Matrix m = rng.gaussian(r, k) * rng.gaussian(k, c);
    Matrix p = pinv(m, tol);
    const double bound = tol.eq * (1.0 + frob(m));
    EXPECT_LE(frob(m * p * m - m), bound);
    EXPECT_LE(frob(p * m * p - p), tol.eq * (1.0 + frob(p)));
    Matrix mp = m * p, pm = p * m;
    EXPECT_LE(frob(mp - mp.adjoint()), bound);
    EXPECT_LE(frob(pm - pm.adjoint()), bound);
  }
}

TEST(PsdSqrt, Identity) {
  EXPECT_TRUE(near(psd_sqrt(PsdMatrix::identity(3), tol).matrix(), Matrix::Identity(3, 3), 1e-15));
}

TEST(PsdSqrt, Diagonal) {
  EXPECT_TRUE(near(psd_sqrt(make_psd(diag({4, 9}), tol), tol).matrix(), diag({2, 3}), 1e-14));
}

TEST(PsdSqrt, TwoByTwo) {
  const double s3 = std::sqrt(3.0);
  Matrix expected = mat({{(s3 + 1) / 2, (s3 - 1) / 2}, {(s3 - 1) / 2, (s3 + 1) / 2}});
  Matrix r = psd_sqrt(make_psd(mat({{2, 1}, {1, 2}}), tol), tol).matrix();
  EXPECT_TRUE(near(r, expected, 1e-14));
  EXPECT_TRUE(near(r * r, mat({{2, 1}, {1, 2}}), 1e-14));
}

TEST(PsdSqrt, SquaresBackOnRandomInputs) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = rng.uniform_int(1, 12);
    PsdMatrix a = PsdMatrix::gram(rng.gaussian(n, rng.uniform_int(1, n)));
    Matrix r = psd_sqrt(a, tol).matrix();
    EXPECT_LE(frob(r * r - a.matrix()), tol.eq * (1.0 + frob(a.matrix())));
  }
}

TEST(PsdSqrt, MonotoneOnCommutingPairs) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = rng.uniform_int(1, 8);
    Matrix a = Matrix::Zero(n, n), b = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      a(i, i) = rng.uniform();
      b(i, i) = a(i, i).real() + rng.uniform();
    }
    HermitianMatrix ra = psd_sqrt(make_psd(a, tol), tol).hermitian();
    HermitianMatrix rb = psd_sqrt(make_psd(b, tol), tol).hermitian();
    EXPECT_TRUE(loewner_leq(ra, rb, tol));
  }
}

TEST(Loewner, Examples) {
  EXPECT_TRUE(loewner_leq(HermitianMatrix::zero(2), HermitianMatrix::identity(2), tol));
  EXPECT_FALSE(loewner_leq(HermitianMatrix::identity(2), HermitianMatrix::zero(2), tol));
  EXPECT_TRUE(loewner_leq(herm(diag({1, -1})), herm(diag({1, 1})), tol));
}

TEST(Loewner, ReflexiveAndTransitive) {
  Rng rng(4);
  Tolerances doubled = tol;
  doubled.psd *= 2;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = rng.uniform_int(1, 10);
    Matrix g = rng.gaussian(n, n);
    HermitianMatrix a = herm(g + g.adjoint());
    HermitianMatrix b = a + PsdMatrix::gram(rng.gaussian(n, rng.uniform_int(1, n))).hermitian();
    HermitianMatrix c = b + PsdMatrix::gram(rng.gaussian(n, rng.uniform_int(1, n))).hermitian();
    EXPECT_TRUE(loewner_leq(a, a, tol));
    ASSERT_TRUE(loewner_leq(a, b, tol));
    ASSERT_TRUE(loewner_leq(b, c, tol));
    EXPECT_TRUE(loewner_leq(a, c, doubled));
  }
}

TEST(NumericalRank, Examples) {
  EXPECT_EQ(numerical_rank(Matrix::Identity(3, 3), tol), 3);
  EXPECT_EQ(numerical_rank(Matrix::Zero(2, 3), tol), 0);
  EXPECT_EQ(numerical_rank(mat({{1, 1}, {1, 1}}), tol), 1);
}

TEST(Hermitize, Examples) {
  EXPECT_TRUE(near(hermitize(diag({1, 2}), tol).matrix(), diag({1, 2}), 0.0));
  EXPECT_TRUE(near(hermitize(mat({{0, 1}, {1, 0}}), tol).matrix(), mat({{0, 1}, {1, 0}}), 0.0));
  try {
    hermitize(mat({{0, 1}, {0, 0}}), tol);
    FAIL() << "expected NotHermitian";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotHermitian);
  }
}

TEST(MakePsd, RejectsIndefinite) {
  try {
    make_psd(diag({1, -1}), tol);
    FAIL() << "expected NotPsd";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotPsd);
  }
}

TEST(Eigh, DescendingWithFixedPhase) {
  Rng rng(5);
  Matrix g = rng.gaussian(5, 5);
  Eigh e = eigh_raw(g + g.adjoint());
  for (Index i = 1; i < 5; ++i) EXPECT_GE(e.values(i - 1), e.values(i));
  for (Index j = 0; j < 5; ++j) {
    Index first = 0;
    while (std::abs(e.vectors(first, j)) <= 1e-10) ++first;
    EXPECT_EQ(e.vectors(first, j).imag(), 0.0);
    EXPECT_GT(e.vectors(first, j).real(), 0.0);
  }
  EXPECT_TRUE(near(e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint(), g + g.adjoint(), 1e-12));
}

TEST(ColumnBasis, OrthonormalSpanOfColumns) {
  Rng rng(6);
  Matrix m = rng.gaussian(6, 2) * rng.gaussian(2, 4);
  Matrix q = column_basis(m, tol);
  ASSERT_EQ(q.cols(), 2);
  EXPECT_TRUE(near(q.adjoint() * q, Matrix::Identity(2, 2), 1e-12));
  EXPECT_LE(frob(m - q * q.adjoint() * m), 1e-12 * frob(m));
}

TEST(Kron, VecIdentity) {
  Rng rng(7);
  Matrix a = rng.gaussian(3, 3), x = rng.gaussian(3, 3), b = rng.gaussian(3, 3);
  // vec(A X B) = (B^T kron A) vec(X)
  EXPECT_TRUE(near(Matrix(vec(a * x * b)), Matrix(kron(b.transpose(), a) * vec(x)), 1e-12));
  EXPECT_TRUE(near(unvec(vec(x), 3, 3), x, 0.0));
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    EXPECT_NE(va, c.next_u64());
  }
  EXPECT_TRUE(near(Rng(9).split(3).gaussian(4, 4), Rng(9).split(3).gaussian(4, 4), 0.0));
  EXPECT_GT(max_abs(Rng(9).split(3).gaussian(4, 4) - Rng(9).split(4).gaussian(4, 4)), 0.0);
}

TEST(Tolerances, RejectNegative) {
  Tolerances t;
  t.eq = -1;
  EXPECT_THROW(t.validate(), Error);
}
