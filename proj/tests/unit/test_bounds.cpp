#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "scov/bounds.hpp"

using namespace scov;

namespace {

Errc code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no scov::Error thrown";
  return Errc::BadConfig;
}

double unbiased_theorem(const SdcmModel& m, const ParamVec& x0, std::size_t k) {
  const IndexSet K = unbiased_index_set(x0, k, m.S());
  const std::size_t N = m.N();
  return theorem_bound({KernelContext(m, x0), K, {MultiIndex::zero(N), MultiIndex::unit(N, k)},
                        unbiased_mean_spec(x0, K, k)})
      .value;
}

}  // namespace

TEST(TheoremBound, ConstantMeanGivesZero) {
  const auto m = identity_model(3, 1, 1.0);
  const ParamVec x0({0.0, 2.0, 0.0});
  MeanSpec mean{4.0, {{MultiIndex::zero(3), 4.0}}};
  const auto r = theorem_bound({KernelContext(m, x0), {1}, {MultiIndex::zero(3)}, mean});
  EXPECT_DOUBLE_EQ(r.value, 0.0);
}

TEST(TheoremBound, UnbiasedAnchors) {
  const auto m = identity_model(5, 1, 1.0);
  const ParamVec x0({1.0, 0.0, 0.0, 0.0, 0.0});
  EXPECT_NEAR(unbiased_theorem(m, x0, 0), 8.0, 1e-12);
  EXPECT_NEAR(unbiased_theorem(m, x0, 1), std::sqrt(3.0), 1e-12);
  const auto r = theorem_bound({KernelContext(m, x0), {0}, {MultiIndex::zero(5), MultiIndex::unit(5, 0)},
                                unbiased_mean_spec(x0, {0}, 0)});
  ASSERT_EQ(r.terms.size(), 2u);
  EXPECT_DOUBLE_EQ(r.terms[0], 1.0);
  EXPECT_DOUBLE_EQ(r.terms[1], 8.0);
  EXPECT_DOUBLE_EQ(r.gamma0_sq, 1.0);
}

TEST(TheoremBound, Errors) {
  const auto m = identity_model(2, 1, 1.0);
  const ParamVec x0({1.0, 0.0});
  const KernelContext ctx(m, x0);
  MeanSpec mean = unbiased_mean_spec(x0, {0}, 0);
  EXPECT_EQ(code_of([&] { theorem_bound({ctx, {0}, {MultiIndex::zero(2), MultiIndex::zero(2)}, mean}); }),
            Errc::DuplicateMultiIndex);
  EXPECT_EQ(code_of([&] { theorem_bound({ctx, {0}, {MultiIndex({2, 0})}, mean}); }), Errc::MissingDerivative);
  EXPECT_EQ(code_of([&] { theorem_bound({ctx, {0, 1}, {MultiIndex::zero(2)}, mean}); }), Errc::BadIndexSet);
  EXPECT_EQ(code_of([&] { theorem_bound({ctx, {0}, {}, mean}); }), Errc::BadConfig);
}

TEST(TheoremBound, AddingMultiIndicesNeverDecreases) {
  const auto m = identity_model(3, 2, 0.8, {1, 2, 1});
  const ParamVec x0({0.5, 1.5, 0.0});
  const KernelContext ctx(m, x0);
  MeanSpec mean{0.7, {}};
  const std::vector<MultiIndex> ps{MultiIndex::zero(3), MultiIndex::unit(3, 0), MultiIndex::unit(3, 1),
                                   MultiIndex({1, 1, 0}), MultiIndex({2, 0, 0}), MultiIndex({0, 2, 0})};
  double v = 0.3;
  for (const auto& p : ps) mean.derivs[p] = (v += 0.37);
  double prev = -1e300;
  std::vector<MultiIndex> use;
  for (const auto& p : ps) {
    use.push_back(p);
    const double b = theorem_bound({ctx, {0, 1}, use, mean}).value;
    EXPECT_GE(b, prev);
    prev = b;
  }
}

TEST(Corollary, Examples) {
  const auto m = identity_model(5, 1, 1.0);
  const ParamVec x0({1.0, 0.0, 0.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(corollary_unbiased_bound(m, x0, 0), 8.0);
  EXPECT_NEAR(corollary_unbiased_bound(m, x0, 1), std::sqrt(3.0), 1e-15);

  const auto m2 = identity_model(3, 2, 1.0, {1, 2, 1});
  EXPECT_DOUBLE_EQ(corollary_unbiased_bound(m2, ParamVec({4.0, 0.0, 0.0}), 1), 1.0);
  EXPECT_EQ(code_of([&] { corollary_unbiased_bound(m, x0, 7); }), Errc::IndexOutOfRange);
}

TEST(Corollary, EqualsTheoremOnGrid) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  int checked = 0;
  for (std::size_t N = 2; N <= 5; ++N)
    for (std::size_t S = 1; S <= 2 && S <= N; ++S)
      for (double s2 : {0.5, 1.0, 2.0})
        for (int rep = 0; rep < 3; ++rep) {
          std::vector<std::size_t> ranks(N);
          for (auto& r : ranks) r = 1 + rng() % 3;
          const auto m = identity_model(N, S, s2, ranks);
          std::vector<double> a(N, 0.0);
          const std::size_t nnz = rng() % (S + 1);
          for (std::size_t i = 0; i < nnz; ++i) a[rng() % N] = u(rng);
          const ParamVec x0(a);
          for (std::size_t k = 0; k < N; ++k) {
            const double c = corollary_unbiased_bound(m, x0, k);
            EXPECT_NEAR(unbiased_theorem(m, x0, k) / c, 1.0, 1e-10);
            EXPECT_GE(c, 0.0);
            ++checked;
          }
        }
  EXPECT_GE(checked, 200);
}

TEST(Corollary, SnrLimits) {
  const auto m = identity_model(3, 1, 1.5, {2, 3, 1});
  for (double xi : {1e-6, 1e6}) {
    const ParamVec x0({0.0, xi, 0.0});
    const double b = corollary_unbiased_bound(m, x0, 0);
    if (xi < 1)
      EXPECT_NEAR(b / (2.0 / 2.0 * 1.5 * 1.5), 1.0, 1e-3);
    else
      EXPECT_LT(b, 1e-3 * (2.0 / 2.0 * 1.5 * 1.5));
  }
}

TEST(UnbiasedMeanSpec, Examples) {
  auto s = unbiased_mean_spec(ParamVec({1.0, 0.0}), {0}, 0);
  EXPECT_EQ(s.gamma_at_x0, 1.0);
  EXPECT_EQ(s.derivs.at(MultiIndex::zero(2)), 1.0);
  EXPECT_EQ(s.derivs.at(MultiIndex::unit(2, 0)), 1.0);
  s = unbiased_mean_spec(ParamVec({1.0, 0.0}), {1}, 1);
  EXPECT_EQ(s.gamma_at_x0, 0.0);
  EXPECT_EQ(s.derivs.at(MultiIndex::zero(2)), 0.0);
  EXPECT_EQ(s.derivs.at(MultiIndex::unit(2, 1)), 1.0);
  s = unbiased_mean_spec(ParamVec({3.0, 2.0, 0.0}), {0, 1}, 0);
  EXPECT_EQ(s.gamma_at_x0, 3.0);
  EXPECT_EQ(s.derivs.at(MultiIndex::zero(3)), 3.0);
}

TEST(UnbiasedIndexSet, TakesLargestOthers) {
  EXPECT_EQ(unbiased_index_set(ParamVec({3.0, 1.0, 2.0, 0.0}), 3, 3), (IndexSet{0, 2, 3}));
  EXPECT_EQ(unbiased_index_set(ParamVec({3.0, 1.0, 2.0, 0.0}), 0, 2), (IndexSet{0, 2}));
  EXPECT_EQ(unbiased_index_set(ParamVec({0.0, 0.0, 0.0}), 2, 2), (IndexSet{0, 2}));
}
