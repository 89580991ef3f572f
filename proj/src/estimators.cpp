#include "scov/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace scov {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

inline constexpr double kBetaFloor = 1e-300;

// acc = sum over the group's rows of phi_tau(proj)^2
void accumulate_group(const simd::KernelTable& kt, const double* proj, std::size_t B, std::size_t row0,
                      std::size_t r, double tau, double* acc) {
  std::fill(acc, acc + B, 0.0);
  for (std::size_t i = 0; i < r; ++i) kt.threshold_square_add(proj + (row0 + i) * B, tau, acc, B);
}

std::vector<std::size_t> row_offsets(const SdcmModel& model) {
  std::vector<std::size_t> off(model.N() + 1, 0);
  for (std::size_t k = 0; k < model.N(); ++k) off[k + 1] = off[k] + model.rank(k);
  return off;
}

void check_observation(const SdcmModel& model, const Observation& y) {
  if (y.y.size() != model.M())
    throw Error(Errc::DimensionMismatch,
                "observation has length " + std::to_string(y.y.size()) + ", expected " + std::to_string(model.M()));
}

// Indices of the `count` largest scores that pass `eligible`; ties go to the lowest index.
template <class Eligible>
void top_scores(const std::vector<double>& score, std::size_t count, Eligible eligible, std::vector<char>& chosen) {
  std::fill(chosen.begin(), chosen.end(), 0);
  for (std::size_t s = 0; s < count; ++s) {
    std::size_t best = score.size();
    for (std::size_t k = 0; k < score.size(); ++k) {
      if (chosen[k] || !eligible(k)) continue;
      if (best == score.size() || score[k] > score[best]) best = k;
    }
    if (best == score.size()) return;
    chosen[best] = 1;
  }
}

}  // namespace

EstimateFn::EstimateFn(const SdcmModel& model, EstimatorKind kind) : kind_(std::move(kind)), n_(model.N()) {
  if (auto* ht = std::get_if<HardThreshold>(&kind_)) {
    if (!(ht->tau >= 0.0)) throw Error(Errc::BadConfig, "threshold tau must be >= 0");
  } else if (auto* oracle = std::get_if<Oracle>(&kind_)) {
    auto& supp = oracle->support;
    std::sort(supp.begin(), supp.end());
    if (supp.size() > model.S()) throw Error(Errc::BadIndexSet, "oracle support larger than S");
    for (std::size_t i = 0; i < supp.size(); ++i) {
      if (supp[i] >= model.N()) throw Error(Errc::BadIndexSet, "oracle support index out of range");
      if (i > 0 && supp[i] == supp[i - 1]) throw Error(Errc::BadIndexSet, "oracle support has duplicates");
    }
  } else if (auto* mvu = std::get_if<S1Mvu>(&kind_)) {
    if (model.S() != 1) throw Error(Errc::NotApplicable, "S1Mvu requires S = 1");
    if (mvu->anchor.size() != model.N()) throw Error(Errc::DimensionMismatch, "anchor length differs from N");
    if (mvu->anchor.l0() != 1) throw Error(Errc::NotApplicable, "S1Mvu requires an anchor with one nonzero entry");
    const std::size_t j0 = mvu->anchor.support().front();
    const double xi = mvu->anchor[j0];
    const double s2 = model.sigma2();
    const double r = static_cast<double>(model.rank(j0));
    const double v = xi + s2;
    mvu_j0_ = j0;
    mvu_a_ = std::pow(v * v - xi * xi, r / 2.0) / (std::pow(s2, r / 2.0) * std::pow(v, r / 2.0));
    mvu_b_ = 0.5 * (1.0 / s2 - 1.0 / v);
  }
}

std::string EstimateFn::name() const {
  return std::visit(overloaded{
                        [](const Naive&) -> std::string { return "naive"; },
                        [](const HardThreshold&) -> std::string { return "ht"; },
                        [](const MaxLikelihood& ml) -> std::string {
                          return ml.rule == MlRule::Exact ? "ml" : "ml_literal";
                        },
                        [](const Oracle&) -> std::string { return "oracle"; },
                        [](const S1Mvu&) -> std::string { return "s1mvu"; },
                    },
                    kind_);
}

std::optional<double> EstimateFn::tau() const {
  if (auto* ht = std::get_if<HardThreshold>(&kind_)) return ht->tau;
  return std::nullopt;
}

void EstimateFn::evaluate_block(const SdcmModel& model, const simd::KernelTable& kt, const double* proj,
                                std::size_t B, double* out, std::vector<double>& scratch) const {
  const std::size_t N = model.N();
  if (N != n_) throw Error(Errc::DimensionMismatch, "estimator was built for a different model");
  const double s2 = model.sigma2();
  const auto off = row_offsets(model);
  auto inv_r = [&](std::size_t k) { return 1.0 / static_cast<double>(model.rank(k)); };

  // beta for every component into scratch (N rows of B)
  auto fill_beta = [&]() {
    scratch.resize(N * B);
    for (std::size_t k = 0; k < N; ++k) {
      double* b = scratch.data() + k * B;
      accumulate_group(kt, proj, B, off[k], model.rank(k), 0.0, b);
      kt.affine(b, inv_r(k), 0.0, b, B);
    }
  };

  std::visit(
      overloaded{
          [&](const Naive&) {
            for (std::size_t k = 0; k < N; ++k) {
              double* o = out + k * B;
              accumulate_group(kt, proj, B, off[k], model.rank(k), 0.0, o);
              kt.affine(o, inv_r(k), -s2, o, B);
            }
          },
          [&](const HardThreshold& ht) {
            for (std::size_t k = 0; k < N; ++k) {
              double* o = out + k * B;
              accumulate_group(kt, proj, B, off[k], model.rank(k), ht.tau, o);
              kt.affine(o, inv_r(k), -s2, o, B);
            }
          },
          [&](const Oracle& oracle) {
            std::size_t next = 0;
            for (std::size_t k = 0; k < N; ++k) {
              double* o = out + k * B;
              if (next < oracle.support.size() && oracle.support[next] == k) {
                ++next;
                accumulate_group(kt, proj, B, off[k], model.rank(k), 0.0, o);
                kt.affine(o, inv_r(k), -s2, o, B);
              } else {
                std::fill(o, o + B, 0.0);
              }
            }
          },
          [&](const MaxLikelihood& ml) {
            fill_beta();
            std::vector<double> score(N);
            std::vector<double> beta_i(N);
            std::vector<char> chosen(N);
            for (std::size_t i = 0; i < B; ++i) {
              for (std::size_t k = 0; k < N; ++k) beta_i[k] = scratch[k * B + i];
              if (ml.rule == MlRule::Exact) {
                for (std::size_t k = 0; k < N; ++k) {
                  const double b = beta_i[k] / s2;
                  score[k] = beta_i[k] > s2 ? 0.5 * static_cast<double>(model.rank(k)) * (b - std::log(b) - 1.0) : 0.0;
                }
                top_scores(score, model.S(), [&](std::size_t k) { return beta_i[k] > s2; }, chosen);
              } else {
                for (std::size_t k = 0; k < N; ++k) {
                  const double b = std::max(beta_i[k], kBetaFloor) / s2;
                  score[k] = static_cast<double>(model.rank(k)) * (b - std::log(b) - 1.0);
                }
                top_scores(score, model.S(), [](std::size_t) { return true; }, chosen);
                for (std::size_t k = 0; k < N; ++k)
                  if (beta_i[k] < s2) chosen[k] = 0;
              }
              for (std::size_t k = 0; k < N; ++k) out[k * B + i] = chosen[k] ? beta_i[k] - s2 : 0.0;
            }
          },
          [&](const S1Mvu&) {
            fill_beta();
            const std::size_t j0 = mvu_j0_;
            const double rj0 = static_cast<double>(model.rank(j0));
            const double* bj0 = scratch.data() + j0 * B;
            for (std::size_t k = 0; k < N; ++k) kt.affine(scratch.data() + k * B, 1.0, -s2, out + k * B, B);
            for (std::size_t i = 0; i < B; ++i) {
              const double alpha = mvu_a_ * std::exp(-rj0 * mvu_b_ * bj0[i]);
              for (std::size_t k = 0; k < N; ++k)
                if (k != j0) out[k * B + i] *= alpha;
            }
          },
      },
      kind_);
}

std::vector<double> projections(const SdcmModel& model, const Observation& y) {
  check_observation(model, y);
  std::vector<double> p;
  p.reserve(model.assigned_dim());
  const Eigen::Map<const Eigen::VectorXd> yv(y.y.data(), static_cast<Eigen::Index>(y.y.size()));
  for (const auto& g : model.groups())
    for (std::size_t col : g)
      p.push_back(model.has_identity_basis() ? y.y[col] : model.basis().col(static_cast<Eigen::Index>(col)).dot(yv));
  return p;
}

std::vector<double> beta(const SdcmModel& model, const Observation& y) {
  const auto p = projections(model, y);
  std::vector<double> b(model.N());
  std::vector<double> scratch;
  const auto& kt = simd::active();
  const auto off = row_offsets(model);
  for (std::size_t k = 0; k < model.N(); ++k) {
    accumulate_group(kt, p.data(), 1, off[k], model.rank(k), 0.0, &b[k]);
    b[k] *= 1.0 / static_cast<double>(model.rank(k));
  }
  return b;
}

std::vector<double> estimate(const EstimateFn& est, const SdcmModel& model, const Observation& y) {
  const auto p = projections(model, y);
  std::vector<double> out(model.N());
  std::vector<double> scratch;
  est.evaluate_block(model, simd::active(), p.data(), 1, out.data(), scratch);
  return out;
}

std::vector<double> naive_estimate(const SdcmModel& model, const Observation& y) {
  return estimate(EstimateFn(model, Naive{}), model, y);
}

std::vector<double> ht_estimate(const SdcmModel& model, const Observation& y, double tau) {
  return estimate(EstimateFn(model, HardThreshold{tau}), model, y);
}

std::vector<double> ml_estimate(const SdcmModel& model, const Observation& y, MlRule rule) {
  return estimate(EstimateFn(model, MaxLikelihood{rule}), model, y);
}

std::vector<double> oracle_estimate(const SdcmModel& model, const Observation& y, const IndexSet& support) {
  return estimate(EstimateFn(model, Oracle{support}), model, y);
}

std::vector<double> s1_mvu_estimate(const SdcmModel& model, const Observation& y, const ParamVec& x0) {
  return estimate(EstimateFn(model, S1Mvu{x0}), model, y);
}

double normal_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); }

double normal_q(double t) { return 0.5 * std::erfc(t / std::numbers::sqrt2); }

double ht_mean(const SdcmModel& model, const ParamVec& x, double tau, std::size_t k) {
  if (k >= x.size()) throw Error(Errc::IndexOutOfRange, "component out of range");
  const double s2 = model.sigma2();
  const double v = x[k] + s2;
  const double t = tau / std::sqrt(v);
  return 2.0 * v * (t * normal_pdf(t) + normal_q(t)) - s2;
}

double ht_mean_derivative(const SdcmModel& model, const ParamVec& x, double tau, std::size_t k) {
  if (k >= x.size()) throw Error(Errc::IndexOutOfRange, "component out of range");
  const double v = x[k] + model.sigma2();
  const double t = tau / std::sqrt(v);
  const double phi = normal_pdf(t);
  return 2.0 * (t * phi + normal_q(t)) + t * t * t * phi;
}

double log_likelihood(const SdcmModel& model, const Observation& y, const ParamVec& x) {
  check_observation(model, y);
  if (x.size() != model.N()) throw Error(Errc::DimensionMismatch, "x length differs from N");
  const double s2 = model.sigma2();
  const std::size_t M = model.M();
  const Eigen::Map<const Eigen::VectorXd> yv(y.y.data(), static_cast<Eigen::Index>(M));
  const Eigen::VectorXd z = model.has_identity_basis() ? Eigen::VectorXd(yv) : Eigen::VectorXd(model.basis().transpose() * yv);

  std::vector<double> var(M, s2);
  for (std::size_t k = 0; k < model.N(); ++k)
    for (std::size_t col : model.groups()[k]) var[col] = x[k] + s2;

  double acc = static_cast<double>(M) * std::log(2.0 * std::numbers::pi);
  for (std::size_t m = 0; m < M; ++m) {
    const double zm = z[static_cast<Eigen::Index>(m)];
    acc += std::log(var[m]) + zm * zm / var[m];
  }
  return -0.5 * acc;
}

}  // namespace scov
