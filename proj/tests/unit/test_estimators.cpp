#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "scov/estimators.hpp"

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

Observation obs(std::vector<double> y) { return Observation{std::move(y)}; }

std::vector<double> random_y(std::size_t M, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> y(M);
  for (auto& v : y) v = scale * g(rng);
  return y;
}

}  // namespace

TEST(Beta, Examples) {
  const auto m = identity_model(2, 1, 1.0);
  EXPECT_EQ(beta(m, obs({2.0, -1.0})), (std::vector<double>{4.0, 1.0}));
  EXPECT_EQ(beta(m, obs({0.0, 0.0})), (std::vector<double>{0.0, 0.0}));

  ModelSpec spec;
  spec.N = 1;
  spec.S = 1;
  spec.ranks = {2};
  Eigen::MatrixXd U(2, 2);
  U << 1, 1, 1, -1;
  spec.basis = U / std::sqrt(2.0);
  EXPECT_NEAR(beta(validate_model(spec), obs({1.0, 1.0}))[0], 1.0, 1e-15);
  EXPECT_EQ(code_of([&] { beta(m, obs({1.0})); }), Errc::DimensionMismatch);
}

TEST(Naive, Examples) {
  const auto m = identity_model(2, 1, 1.0);
  EXPECT_EQ(naive_estimate(m, obs({2.0, -1.0})), (std::vector<double>{3.0, 0.0}));
  EXPECT_EQ(naive_estimate(m, obs({0.0, 0.0})), (std::vector<double>{-1.0, -1.0}));
}

TEST(HardThreshold, Examples) {
  const auto m = identity_model(2, 1, 1.0);
  EXPECT_EQ(ht_estimate(m, obs({4.0, -1.0}), 3.0), (std::vector<double>{15.0, -1.0}));
  EXPECT_EQ(ht_estimate(m, obs({2.0, -1.0}), 3.0), (std::vector<double>{-1.0, -1.0}));
  EXPECT_EQ(ht_estimate(m, obs({-3.0, 3.0}), 3.0), (std::vector<double>{8.0, 8.0}));
  EXPECT_EQ(code_of([&] { EstimateFn(m, HardThreshold{-1.0}); }), Errc::BadConfig);
}

TEST(HardThreshold, ZeroThresholdIsNaive) {
  std::mt19937_64 rng(3);
  const auto m = identity_model(4, 2, 0.7, {1, 3, 2, 1});
  for (int i = 0; i < 100; ++i) {
    const auto y = obs(random_y(m.M(), 2.0, rng));
    EXPECT_EQ(ht_estimate(m, y, 0.0), naive_estimate(m, y));
  }
}

TEST(HtMean, ClosedFormExamples) {
  const auto m = identity_model(2, 1, 1.0);
  const ParamVec x({2.5, 0.0});
  EXPECT_NEAR(ht_mean(m, x, 0.0, 0), 2.5, 1e-15);
  EXPECT_NEAR(ht_mean(m, x, 60.0, 0), -1.0, 1e-15);
  // 2 (phi(1) + Q(1)) - 1 with phi(1), Q(1) from scipy.stats.norm
  EXPECT_NEAR(ht_mean(m, x, 1.0, 1), -0.19874804309879912, 1e-14);
}

TEST(HtMean, DerivativeMatchesDifferenceQuotient) {
  const auto m = identity_model(1, 1, 1.0);
  for (double tau : {0.0, 1.0, 3.0, 6.0})
    for (double xk : {0.0, 1.0, 10.0}) {
      const double h = 1e-5 * (1.0 + xk);
      auto f = [&](double x) { return ht_mean(m, ParamVec({x}), tau, 0); };
      const double fd = (-3.0 * f(xk) + 4.0 * f(xk + h) - f(xk + 2 * h)) / (2 * h);
      EXPECT_NEAR(ht_mean_derivative(m, ParamVec({xk}), tau, 0), fd, 1e-6);
    }
}

TEST(MaxLikelihood, Example) {
  const auto m = identity_model(5, 1, 1.0);
  const auto y = obs({2.0, 1.0, 0.0, 0.0, 0.0});
  EXPECT_EQ(ml_estimate(m, y), (std::vector<double>{3.0, 0.0, 0.0, 0.0, 0.0}));
  // beta = 0 scores +inf under the literal rule and takes the only slot.
  EXPECT_EQ(ml_estimate(m, y, MlRule::Literal), (std::vector<double>(5, 0.0)));
  EXPECT_EQ(ml_estimate(identity_model(2, 1, 1.0), obs({2.0, 1.0}), MlRule::Literal),
            (std::vector<double>{3.0, 0.0}));
}

TEST(MaxLikelihood, AllBelowNoiseGivesZero) {
  const auto m = identity_model(4, 2, 1.0);
  const auto y = obs({0.5, -0.9, 0.0, 0.99});
  EXPECT_EQ(ml_estimate(m, y), std::vector<double>(4, 0.0));
  EXPECT_EQ(ml_estimate(m, y, MlRule::Literal), std::vector<double>(4, 0.0));
}

TEST(MaxLikelihood, LiteralRuleCanWasteSlot) {
  // beta = (0.001, 4): the literal score of component 1 exceeds that of
  // component 2, so L1 = {1} and L1 n L2 is empty.
  const auto m = identity_model(2, 1, 1.0);
  const auto y = obs({std::sqrt(0.001), 2.0});
  EXPECT_EQ(ml_estimate(m, y, MlRule::Literal), (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(ml_estimate(m, y), (std::vector<double>{0.0, 3.0}));
  EXPECT_GT(log_likelihood(m, y, ParamVec({0.0, 3.0})), log_likelihood(m, y, ParamVec({0.0, 0.0})));
}

TEST(MaxLikelihood, FullSparsityIsClippedNaive) {
  std::mt19937_64 rng(8);
  const auto m = identity_model(5, 5, 1.3, {1, 2, 1, 3, 1});
  for (int i = 0; i < 100; ++i) {
    const auto y = obs(random_y(m.M(), 1.5, rng));
    const auto b = beta(m, y);
    const auto ml = ml_estimate(m, y);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(ml[k], b[k] > 1.3 ? b[k] - 1.3 : 0.0);
  }
}

TEST(MaxLikelihood, MatchesBruteForceAndBeatsLiteral) {
  std::mt19937_64 rng(17);
  for (int cfg = 0; cfg < 6; ++cfg) {
    const std::size_t N = 2 + cfg % 5;
    const std::size_t S = 1 + cfg % 2;
    std::vector<std::size_t> ranks(N);
    for (auto& r : ranks) r = 1 + rng() % 2;
    std::size_t R = 0;
    for (auto r : ranks) R += r;
    const auto m = oracle::random_basis_model(N, S, 0.9, ranks, R + 1, rng);
    for (int i = 0; i < 200; ++i) {
      const auto y = random_y(m.M(), 1.0 + (i % 4), rng);
      const auto ml = ml_estimate(m, obs(y));
      const auto ref = oracle::brute_force_ml(m, y);
      EXPECT_EQ(ParamVec(ml).support(), ref.support());
      for (std::size_t k = 0; k < N; ++k) EXPECT_NEAR(ml[k], ref[k], 1e-12);
      const auto lit = ml_estimate(m, obs(y), MlRule::Literal);
      EXPECT_GE(log_likelihood(m, obs(y), ParamVec(ml)), log_likelihood(m, obs(y), ParamVec(lit)) - 1e-12);
    }
  }
}

TEST(LogLikelihood, MatchesDenseForm) {
  std::mt19937_64 rng(23);
  const auto m = oracle::random_basis_model(3, 2, 0.6, {2, 1, 1}, 5, rng);
  for (int i = 0; i < 20; ++i) {
    const auto y = random_y(5, 1.5, rng);
    const ParamVec x({0.3 * i, 0.0, 1.1});
    EXPECT_NEAR(log_likelihood(m, obs(y), x), oracle::dense_log_likelihood(m, y, x), 1e-11);
  }
}

TEST(Oracle, Examples) {
  const auto m = identity_model(2, 2, 1.0);
  EXPECT_EQ(oracle_estimate(m, obs({2.0, 5.0}), {}), (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(oracle_estimate(m, obs({2.0, 5.0}), {0, 1}), naive_estimate(m, obs({2.0, 5.0})));
  const auto m1 = identity_model(2, 1, 1.0);
  EXPECT_EQ(oracle_estimate(m1, obs({2.0, 5.0}), {0}), (std::vector<double>{3.0, 0.0}));
  EXPECT_EQ(code_of([&] { oracle_estimate(m1, obs({2.0, 5.0}), {0, 1}); }), Errc::BadIndexSet);
  EXPECT_EQ(code_of([&] { oracle_estimate(m1, obs({2.0, 5.0}), {4}); }), Errc::BadIndexSet);
}

TEST(S1Mvu, Example) {
  const auto m = identity_model(2, 1, 1.0);
  const ParamVec x0({1.0, 0.0});
  const EstimateFn est(m, S1Mvu{x0});
  EXPECT_NEAR(est.mvu_a(), std::sqrt(3.0) / std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(est.mvu_b(), 0.25);
  const auto out = s1_mvu_estimate(m, obs({0.0, 2.0}), x0);
  EXPECT_EQ(out[0], -1.0);
  EXPECT_NEAR(out[1], 3.0 * std::sqrt(1.5), 1e-14);
}

TEST(S1Mvu, SmallAnchorApproachesNaive) {
  const auto m = identity_model(3, 1, 1.0, {2, 1, 1});
  const ParamVec x0({0.0, 1e-9, 0.0});
  const auto y = obs({0.3, -1.2, 2.0, 0.7});
  const auto a = s1_mvu_estimate(m, y, x0);
  const auto b = naive_estimate(m, y);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a[k], b[k], 1e-8);
}

TEST(S1Mvu, NotApplicable) {
  const auto m2 = identity_model(3, 2, 1.0);
  EXPECT_EQ(code_of([&] { EstimateFn(m2, S1Mvu{ParamVec({1.0, 0.0, 0.0})}); }), Errc::NotApplicable);
  const auto m1 = identity_model(3, 1, 1.0);
  EXPECT_EQ(code_of([&] { EstimateFn(m1, S1Mvu{ParamVec({1.0, 1.0, 0.0})}); }), Errc::NotApplicable);
  EXPECT_EQ(code_of([&] { EstimateFn(m1, S1Mvu{ParamVec::zeros(3)}); }), Errc::NotApplicable);
}

TEST(Estimators, Names) {
  const auto m = identity_model(2, 1, 1.0);
  EXPECT_EQ(EstimateFn(m, Naive{}).name(), "naive");
  EXPECT_EQ(EstimateFn(m, HardThreshold{3}).name(), "ht");
  EXPECT_EQ(EstimateFn(m, HardThreshold{3}).tau(), 3.0);
  EXPECT_EQ(EstimateFn(m, MaxLikelihood{}).name(), "ml");
  EXPECT_EQ(EstimateFn(m, MaxLikelihood{MlRule::Literal}).name(), "ml_literal");
  EXPECT_EQ(EstimateFn(m, Oracle{{0}}).name(), "oracle");
  EXPECT_EQ(EstimateFn(m, S1Mvu{ParamVec({1.0, 0.0})}).name(), "s1mvu");
}

TEST(Estimators, ScaleEquivariance) {
  std::mt19937_64 rng(41);
  const double c = 1.7;
  const auto m = identity_model(4, 1, 0.8, {1, 2, 1, 1});
  const auto ms = identity_model(4, 1, 0.8 * c * c, {1, 2, 1, 1});
  const ParamVec x0({0.0, 2.0, 0.0, 0.0});
  const ParamVec x0s({0.0, 2.0 * c * c, 0.0, 0.0});
  for (int i = 0; i < 50; ++i) {
    auto y = random_y(m.M(), 1.5, rng);
    auto ys = y;
    for (auto& v : ys) v *= c;
    auto check = [&](const std::vector<double>& a, const std::vector<double>& b) {
      for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(b[k], c * c * a[k], 1e-12 * (1 + std::abs(b[k])));
    };
    check(naive_estimate(m, obs(y)), naive_estimate(ms, obs(ys)));
    check(ht_estimate(m, obs(y), 1.1), ht_estimate(ms, obs(ys), 1.1 * c));
    check(ml_estimate(m, obs(y)), ml_estimate(ms, obs(ys)));
    check(ml_estimate(m, obs(y), MlRule::Literal), ml_estimate(ms, obs(ys), MlRule::Literal));
    check(oracle_estimate(m, obs(y), {1}), oracle_estimate(ms, obs(ys), {1}));
    check(s1_mvu_estimate(m, obs(y), x0), s1_mvu_estimate(ms, obs(ys), x0s));
  }
}
