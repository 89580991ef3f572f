#include "scov/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

namespace scov {
namespace {

void check_len(const KernelContext& ctx, std::span<const double> x, const char* name) {
  if (x.size() != ctx.model().N())
    throw Error(Errc::DimensionMismatch, std::string(name) + " has " + std::to_string(x.size()) +
                                             " entries, model has N = " + std::to_string(ctx.model().N()));
}

// Rising factorial (a)_n.
double rising(double a, unsigned n) {
  double r = 1.0;
  for (unsigned i = 0; i < n; ++i) r *= a + i;
  return r;
}

double falling_factorial(unsigned n, unsigned j) {
  double r = 1.0;
  for (unsigned i = 0; i < j; ++i) r *= static_cast<double>(n - i);
  return r;
}

double binomial(unsigned n, unsigned k) {
  double r = 1.0;
  for (unsigned i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / i;
  return r;
}

// Covariance with eigenvalue x_k + sigma2 on group k, built without the
// nonnegativity requirement of covariance_tilde.
Eigen::MatrixXd cov_from_point(const SdcmModel& model, std::span<const double> x) {
  const auto M = static_cast<Eigen::Index>(model.M());
  Eigen::VectorXd eig = Eigen::VectorXd::Constant(M, model.sigma2());
  for (std::size_t k = 0; k < model.N(); ++k)
    for (std::size_t col : model.groups()[k]) eig[static_cast<Eigen::Index>(col)] = x[k] + model.sigma2();
  const auto& U = model.basis();
  Eigen::MatrixXd C = U * eig.asDiagonal() * U.transpose();
  return 0.5 * (C + C.transpose());
}

struct SpdFactor {
  double logdet;
  Eigen::MatrixXd inverse;
};

SpdFactor factor_spd(const Eigen::MatrixXd& A, Errc on_failure, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw Error(on_failure, std::string(what) + " is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    if (!(L(i, i) > 0.0)) throw Error(on_failure, std::string(what) + " is not positive definite");
    logdet += 2.0 * std::log(L(i, i));
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(A.rows(), A.cols()));
  return {logdet, 0.5 * (inv + inv.transpose())};
}

}  // namespace

KernelContext::KernelContext(SdcmModel model, ParamVec x0) : model_(std::move(model)), x0_(std::move(x0)) {
  if (x0_.size() != model_.N())
    throw Error(Errc::DimensionMismatch, "anchor has " + std::to_string(x0_.size()) +
                                             " entries, model has N = " + std::to_string(model_.N()));
  c_.resize(model_.N());
  m_.resize(model_.N());
  for (std::size_t k = 0; k < model_.N(); ++k) {
    const double v = x0_[k] + model_.sigma2();
    c_[k] = v * v;
    m_[k] = 0.5 * static_cast<double>(model_.rank(k));
  }
}

double kernel_general(const KernelContext& ctx, std::span<const double> x1, std::span<const double> x2) {
  check_len(ctx, x1, "x1");
  check_len(ctx, x2, "x2");
  const auto& model = ctx.model();
  const auto f0 = factor_spd(cov_from_point(model, ctx.x0().values()), Errc::SingularCovariance, "C(x0)");
  const auto f1 = factor_spd(cov_from_point(model, x1), Errc::SingularCovariance, "C(x1)");
  const auto f2 = factor_spd(cov_from_point(model, x2), Errc::SingularCovariance, "C(x2)");
  Eigen::MatrixXd B = f1.inverse + f2.inverse - f0.inverse;
  B = 0.5 * (B + B.transpose());
  const auto fb = factor_spd(B, Errc::IndefiniteArgument, "C1^-1 + C2^-1 - C0^-1");
  // det(C1 C2 B) = det C1 det C2 det B
  return std::exp(0.5 * f0.logdet - 0.5 * (f1.logdet + f2.logdet + fb.logdet));
}

double kernel_sdcm(const KernelContext& ctx, std::span<const double> x1, std::span<const double> x2) {
  check_len(ctx, x1, "x1");
  check_len(ctx, x2, "x2");
  double log_r = 0.0;
  for (std::size_t k = 0; k < x1.size(); ++k) {
    const double prod = (x1[k] - ctx.x0()[k]) * (x2[k] - ctx.x0()[k]);
    const double c = ctx.c(k);
    if (!(prod < c))
      throw Error(Errc::DomainViolation, "factor " + std::to_string(k + 1) + " has nonpositive base");
    log_r -= ctx.m(k) * std::log1p(-prod / c);
  }
  return std::exp(log_r);
}

double coord_deriv_factor(unsigned p, unsigned q, double c, double m, double s) {
  if (!(c > 0.0)) throw Error(Errc::DivergentSeries, "c must be positive");
  const double w = 1.0 - s * s / c;
  if (!(w > 0.0)) throw Error(Errc::DivergentSeries, "s^2 >= c");
  double sum = 0.0;
  for (unsigned j = 0; j <= std::min(p, q); ++j) {
    const unsigned spow = p + q - 2 * j;
    double term = binomial(p, j) * falling_factorial(q, j) * rising(m + q, p - j);
    term *= std::pow(s, static_cast<int>(spow)) * std::pow(c, -static_cast<double>(p - j));
    term *= std::pow(w, -(m + static_cast<double>(p + q - j)));
    sum += term;
  }
  return rising(m, q) * std::pow(c, -static_cast<double>(q)) * sum;
}

double coord_deriv_series(unsigned p, unsigned q, double c, double m, double s) {
  if (!(c > 0.0)) throw Error(Errc::DivergentSeries, "c must be positive");
  const double ratio = s * s / c;
  if (!(ratio < 1.0)) throw Error(Errc::DivergentSeries, "s^2 >= c");

  if (s == 0.0) {
    // only n = p = q survives
    if (p != q) return 0.0;
    double v = 1.0;
    for (unsigned i = 0; i < p; ++i) v *= (m + i) * (i + 1) / c;
    return v;
  }

  const unsigned n0 = std::max(p, q);
  // (m)_n0 / n0! * n0!/(n0-p)! * n0!/(n0-q)! = (m)_n0 * n0! / ((n0-p)! (n0-q)!)
  double term = rising(m, n0) * falling_factorial(n0, p) * falling_factorial(n0, q);
  for (unsigned i = 0; i < n0; ++i) term /= static_cast<double>(i + 1);
  term *= std::pow(c, -static_cast<double>(n0)) * std::pow(s, static_cast<int>(2 * n0 - p - q));

  double sum = term;
  int small = 0;
  for (unsigned n = n0; ; ++n) {
    if (static_cast<int>(n - n0) + 1 >= kSeriesMaxTerms)
      throw Error(Errc::DivergentSeries, "series did not converge within " + std::to_string(kSeriesMaxTerms) + " terms");
    const double np1 = static_cast<double>(n + 1);
    term *= (m + n) * np1 / ((np1 - p) * (np1 - q)) * ratio;
    sum += term;
    if (std::abs(term) < kSeriesRelTol * std::abs(sum)) {
      if (++small == 3) break;
    } else {
      small = 0;
    }
  }
  return sum;
}

double q_factor(const KernelContext& ctx, const IndexSet& K, const MultiIndex& p) {
  const auto& model = ctx.model();
  if (p.size() != model.N())
    throw Error(Errc::DimensionMismatch, "multi-index length differs from N");
  const ParamVec anchor = restrict_support(ctx.x0(), K, model.S());
  for (std::size_t k : p.support())
    if (std::find(K.begin(), K.end(), k) == K.end())
      throw Error(Errc::BadIndexSet, "multi-index " + p.to_string() + " not supported on K");
  double q = 1.0;
  for (std::size_t k = 0; k < model.N(); ++k) {
    const double s = anchor[k] - ctx.x0()[k];
    q *= coord_deriv_factor(p[k], p[k], ctx.c(k), ctx.m(k), s);
  }
  return q;
}

}  // namespace scov
