#pragma once

// Reference computations that avoid the library's closed forms.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>

#include "scov/kernel.hpp"
#include "scov/model.hpp"

namespace scov::oracle {

inline Eigen::MatrixXd random_orthonormal(std::size_t M, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(M, M);
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  return qr.householderQ() * Eigen::MatrixXd::Identity(M, M);
}

inline SdcmModel random_basis_model(std::size_t N, std::size_t S, double sigma2, std::vector<std::size_t> ranks,
                                    std::size_t M, std::mt19937_64& rng) {
  ModelSpec spec;
  spec.N = N;
  spec.S = S;
  spec.sigma2 = sigma2;
  spec.ranks = std::move(ranks);
  spec.basis = random_orthonormal(M, rng);
  return validate_model(spec);
}

/// ln N(y; 0, C(x)) from the dense covariance.
inline double dense_log_likelihood(const SdcmModel& model, const std::vector<double>& y, const ParamVec& x) {
  const Eigen::MatrixXd C = covariance_tilde(model, x);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  const Eigen::MatrixXd L = llt.matrixL();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) logdet += 2.0 * std::log(L(i, i));
  const double quad = yv.dot(llt.solve(yv));
  return -0.5 * (static_cast<double>(y.size()) * std::log(2.0 * M_PI) + logdet + quad);
}

/// argmax of the likelihood over X_{S,+} by enumerating every support of
/// size <= S; on a fixed support the maximiser is max(beta_k - sigma2, 0)
/// per group, with beta from dense projections.
inline ParamVec brute_force_ml(const SdcmModel& model, const std::vector<double>& y) {
  const std::size_t N = model.N();
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  std::vector<double> b(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    for (std::size_t col : model.groups()[k]) {
      const double p = model.basis().col(static_cast<Eigen::Index>(col)).dot(yv);
      b[k] += p * p;
    }
    b[k] /= static_cast<double>(model.rank(k));
  }
  ParamVec best = ParamVec::zeros(N);
  double best_ll = dense_log_likelihood(model, y, best);
  for (unsigned mask = 1; mask < (1u << N); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) > model.S()) continue;
    std::vector<double> x(N, 0.0);
    for (std::size_t k = 0; k < N; ++k)
      if (mask & (1u << k)) x[k] = std::max(b[k] - model.sigma2(), 0.0);
    ParamVec cand(x);
    const double ll = dense_log_likelihood(model, y, cand);
    if (ll > best_ll + 1e-12 * std::abs(best_ll)) {
      best_ll = ll;
      best = cand;
    }
  }
  return best;
}

/// d^p/dx1^p d^p/dx2^p kernel_sdcm at x1 = x2 = at, from tensor products of
/// fourth-order central stencils with step h_k = rel_step (x0_k + sigma2).
inline double fd_q_factor(const KernelContext& ctx, const ParamVec& at, const MultiIndex& p, double rel_step = 0.01) {
  static const double d1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
  static const double d2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
  const std::size_t N = at.size();
  struct Axis {
    int arg;  // 0: x1, 1: x2
    std::size_t k;
    unsigned order;
    double h;
  };
  std::vector<Axis> axes;
  for (int arg = 0; arg < 2; ++arg)
    for (std::size_t k = 0; k < N; ++k)
      if (p[k] > 0) axes.push_back({arg, k, p[k], rel_step * (ctx.x0()[k] + ctx.model().sigma2())});

  std::vector<int> idx(axes.size(), 0);
  double sum = 0.0;
  while (true) {
    std::vector<double> x1 = at.entries(), x2 = at.entries();
    double w = 1.0;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const int off = idx[a] - 2;
      const auto& ax = axes[a];
      (ax.arg == 0 ? x1 : x2)[ax.k] += off * ax.h;
      w *= (ax.order == 1 ? d1[idx[a]] : d2[idx[a]]) / std::pow(ax.h, ax.order);
    }
    if (w != 0.0) sum += w * kernel_sdcm(ctx, x1, x2);
    std::size_t a = 0;
    for (; a < axes.size(); ++a) {
      if (++idx[a] < 5) break;
      idx[a] = 0;
    }
    if (a == axes.size()) break;
  }
  return sum;
}

/// E[u^4 1{|u| >= tau}] - E[u^2 1{|u| >= tau}]^2 for u ~ N(0, v): the
/// variance of the one-coordinate thresholded square.
inline double ht_square_variance(double v, double tau) {
  const double t = tau / std::sqrt(v);
  const double phi = std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
  const double Q = 0.5 * std::erfc(t / std::sqrt(2.0));
  const double m2 = 2.0 * v * (t * phi + Q);
  const double m4 = 2.0 * v * v * ((t * t * t + 3.0 * t) * phi + 3.0 * Q);
  return m4 - m2 * m2;
}

}  // namespace scov::oracle
