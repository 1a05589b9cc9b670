#include <gtest/gtest.h>

#include "opext/oracle.hpp"
#include "support.hpp"

using namespace opext;
using namespace opext::testing;

namespace {

const Tolerances tol;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::InvalidInput;
}

}  // namespace

TEST(SampledBound, IdentityApproachesOneFromBelow) {
  Rng rng(50);
  const double v = oracle::sampled_bound(HermitianMatrix::identity(4), PsdMatrix::identity(4), 2000, rng);
  EXPECT_LE(v, 1.0 + tol.eq);
  EXPECT_GE(v, 0.98);
}

TEST(SampledBound, ZeroOperator) {
  Rng rng(51);
  EXPECT_EQ(oracle::sampled_bound(HermitianMatrix::zero(3), PsdMatrix::identity(3), 500, rng), 0.0);
}

TEST(SampledBound, SmallRatioDoesNotDrift) {
  Rng rng(53);
  SymmetricPartialOperator s0 = SymmetricPartialOperator::make(mat({{Complex(0.7, 1.1)}}), mat({{Complex(0.035, 0.055)}}), tol);
  PsdMatrix a = PsdMatrix::gram(mat({{0.99}}));
  const double exact = std::abs(Complex(0.035, 0.055)) / (0.99 * 0.99 * std::abs(Complex(0.7, 1.1)));
  EXPECT_NEAR(oracle::sampled_bound(s0, a, 10000, rng), exact, 1e-12);
}

TEST(SampledBound, WorkedInstance) {
  Rng rng(52);
  SymmetricPartialOperator s0 = SymmetricPartialOperator::make(e(2, 0), e(2, 0), tol);
  const double v = oracle::sampled_bound(s0, PsdMatrix::identity(2), 10000, rng);
  EXPECT_GE(v, 0.98);
  EXPECT_LE(v, 1.0 + tol.eq);
}

TEST(SampledBound, MonotoneInSamples) {
  Rng gen(53);
  oracle::SaExtInstance inst = oracle::random_sa_ext(std::vector<Index>{6}, gen);
  double last = 0.0;
  for (std::size_t samples : {1u, 10u, 100u, 1000u, 5000u}) {
    Rng rng(54);
    const double v = oracle::sampled_bound(inst.s0, inst.a, samples, rng);
    EXPECT_GE(v, last);
    last = v;
  }
}

TEST(SampledBound, AgreesWithABound) {
  Rng rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Index> dims{static_cast<Index>(rng.uniform_int(1, 8))};
    oracle::SaExtInstance inst = oracle::random_sa_ext(dims, rng);
    const double alpha = a_bound(inst.s0, inst.a, tol);
    Rng sampler = rng.split(static_cast<std::uint64_t>(trial));
    const double v = oracle::sampled_bound(inst.s0, inst.a, 10000, sampler);
    EXPECT_LE(v, alpha * (1.0 + tol.eq) + tol.eq);
    EXPECT_GE(v, 0.98 * alpha);
  }
}

TEST(MinCompletionSearch, MinimalPsdCompletion) {
  oracle::SearchResult r = oracle::min_completion_search(
      [](const std::vector<double>& p) { return mat({{1, 1}, {1, p[0]}}); },
      [](const Matrix& m) { return loewner_leq(HermitianMatrix::zero(2), HermitianMatrix::symmetrized(m), tol); },
      [](const std::vector<double>& p, const Matrix&) { return p[0]; }, {{-2.0, 2.0}});
  EXPECT_NEAR(r.params[0], 1.0, 1e-5);
  EXPECT_NEAR(r.value, 1.0, 1e-5);
}

TEST(MinCompletionSearch, ForcedContractionEntry) {
  oracle::SearchResult r = oracle::min_completion_search(
      [](const std::vector<double>& p) { return mat({{0, 1}, {1, p[0]}}); },
      [](const Matrix& m) { return spectral_norm(m) <= 1.0 + 1e-12; },
      [](const std::vector<double>& p, const Matrix&) { return std::abs(p[0]); }, {{-2.0, 2.0}});
  EXPECT_NEAR(r.params[0], 0.0, 1e-5);
}

TEST(MinCompletionSearch, ExtensionEndpoints) {
  auto family = [](const std::vector<double>& p) { return diag({1, p[0]}); };
  auto constraint = [](const Matrix& m) {
    return spectral_norm(m) <= 1.0 + 1e-12 && frob(m * e(2, 0) - e(2, 0)) <= 1e-12;
  };
  std::vector<oracle::ParamRange> box{{-2.0, 2.0}};
  oracle::SearchResult lo =
      oracle::min_completion_search(family, constraint, [](const auto& p, const Matrix&) { return p[0]; }, box);
  oracle::SearchResult hi =
      oracle::min_completion_search(family, constraint, [](const auto& p, const Matrix&) { return -p[0]; }, box);
  EXPECT_NEAR(lo.params[0], -1.0, 1e-5);
  EXPECT_NEAR(hi.params[0], 1.0, 1e-5);
}

TEST(MinCompletionSearch, Errors) {
  auto family = [](const std::vector<double>& p) { return diag({p[0]}); };
  auto objective = [](const std::vector<double>&, const Matrix&) { return 0.0; };
  EXPECT_EQ(code_of([&] {
              oracle::min_completion_search(family, [](const Matrix&) { return false; }, objective, {{0.0, 1.0}});
            }),
            Errc::Infeasible);
  EXPECT_EQ(code_of([&] {
              oracle::min_completion_search(family, [](const Matrix&) { return true; }, objective,
                                            {{0, 1}, {0, 1}, {0, 1}, {0, 1}});
            }),
            Errc::InvalidDims);
}

TEST(RandomInstance, KvnIsDeterministicAndFeasible) {
  std::vector<Index> dims{4};
  Rng a(42), b(42);
  oracle::KvnInstance x = oracle::random_kvn(dims, a);
  oracle::KvnInstance y = oracle::random_kvn(dims, b);
  EXPECT_EQ(x.op.ambient_dim(), 4);
  EXPECT_TRUE(check_restriction(x.op, tol));
  EXPECT_TRUE(x.op.domain() == y.op.domain());
  EXPECT_TRUE(x.op.values() == y.op.values());
}

TEST(RandomInstance, StrongParrottPassesHypotheses) {
  Rng rng(7);
  std::vector<Index> dims{2, 2, 2};
  oracle::Instance inst = oracle::random_instance(oracle::InstanceKind::StrongParrott, dims, rng);
  ASSERT_TRUE(std::holds_alternative<oracle::StrongParrottCase>(inst));
  const auto& c = std::get<oracle::StrongParrottCase>(inst);
  EXPECT_EQ(c.inst.s1.rows(), 2);
  EXPECT_TRUE(check_strong_parrott(c.inst, tol).ok());
}

TEST(RandomInstance, EveryKindBuilds) {
  using K = oracle::InstanceKind;
  for (K kind : {K::Kvn, K::SaExt, K::Parrott, K::StrongParrott, K::Functional}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      EXPECT_NO_THROW(oracle::random_instance(kind, {}, rng));
    }
  }
}

TEST(RandomInstance, RejectsInvalidDims) {
  using K = oracle::InstanceKind;
  Rng rng(1);
  EXPECT_EQ(code_of([&] { oracle::random_instance(K::Kvn, std::vector<Index>{17}, rng); }), Errc::InvalidDims);
  EXPECT_EQ(code_of([&] { oracle::random_instance(K::Kvn, std::vector<Index>{0}, rng); }), Errc::InvalidDims);
  EXPECT_EQ(code_of([&] { oracle::random_instance(K::Functional, std::vector<Index>{5}, rng); }), Errc::InvalidDims);
  EXPECT_EQ(code_of([&] { oracle::random_instance(K::SaExt, std::vector<Index>{3, 4}, rng); }), Errc::InvalidDims);
}

TEST(RandomCommuting, HypothesesHold) {
  Rng rng(56);
  for (int trial = 0; trial < 30; ++trial) {
    oracle::CommutingInstance c = oracle::random_commuting(rng.uniform_int(1, 12), rng);
    const Matrix& b = c.b.matrix();
    const Matrix& s = c.hidden.matrix();
    EXPECT_LE(frob(b * s - s * b), 1e-10 * (1.0 + frob(b) * frob(s)));
    const Matrix& d = c.s0.domain();
    EXPECT_LE(frob(b * d - d * pinv(d, tol) * b * d), 1e-10 * (1.0 + frob(b) * frob(d)));
  }
}
