#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "scov/model.hpp"
#include "scov/simd/kernels.hpp"

namespace scov {

struct Observation {
  std::vector<double> y;  // length M
};

struct Naive {};
struct HardThreshold {
  double tau = 0.0;
};
enum class MlRule { Exact, Literal };
struct MaxLikelihood {
  MlRule rule = MlRule::Exact;
};
struct Oracle {
  IndexSet support;
};
/// Locally minimum-variance unbiased estimator for S = 1, anchored at a
/// parameter vector with exactly one nonzero entry.
struct S1Mvu {
  ParamVec anchor;
};

using EstimatorKind = std::variant<Naive, HardThreshold, MaxLikelihood, Oracle, S1Mvu>;

/// Validated estimator bound to the dimensions of one model.
class EstimateFn {
 public:
  /// Throws BadConfig (tau < 0), BadIndexSet (oracle support) or
  /// NotApplicable (S1Mvu without S = 1 and a one-sparse anchor).
  EstimateFn(const SdcmModel& model, EstimatorKind kind);

  const EstimatorKind& kind() const noexcept { return kind_; }
  std::string name() const;
  std::optional<double> tau() const;

  /// Estimates for B samples from their projections onto the assigned basis
  /// columns (row r of `proj` holds coordinate r for all samples, rows in
  /// group order). Writes N rows of B values to `out`.
  void evaluate_block(const SdcmModel& model, const simd::KernelTable& kernels, const double* proj,
                      std::size_t B, double* out, std::vector<double>& scratch) const;

  // S1Mvu constants: alpha(y) = a exp(-r_j0 b beta_j0(y)).
  double mvu_a() const noexcept { return mvu_a_; }
  double mvu_b() const noexcept { return mvu_b_; }
  std::size_t mvu_j0() const noexcept { return mvu_j0_; }

 private:
  EstimatorKind kind_;
  std::size_t n_ = 0;
  double mvu_a_ = 1.0;
  double mvu_b_ = 0.0;
  std::size_t mvu_j0_ = 0;
};

/// u^T y for every assigned basis column, in group order (length sum r_k).
std::vector<double> projections(const SdcmModel& model, const Observation& y);

/// beta_k = (1/r_k) sum_i (u_{m_{k,i}}^T y)^2
std::vector<double> beta(const SdcmModel& model, const Observation& y);

std::vector<double> naive_estimate(const SdcmModel& model, const Observation& y);
std::vector<double> ht_estimate(const SdcmModel& model, const Observation& y, double tau);
std::vector<double> ml_estimate(const SdcmModel& model, const Observation& y, MlRule rule = MlRule::Exact);
std::vector<double> oracle_estimate(const SdcmModel& model, const Observation& y, const IndexSet& support);
std::vector<double> s1_mvu_estimate(const SdcmModel& model, const Observation& y, const ParamVec& x0);

std::vector<double> estimate(const EstimateFn& est, const SdcmModel& model, const Observation& y);

/// E_x of the hard-threshold estimate of component k:
///   2v [t phi(t) + Q(t)] - sigma2,  v = x_k + sigma2, t = tau / sqrt(v).
double ht_mean(const SdcmModel& model, const ParamVec& x, double tau, std::size_t k);

/// d/dx_k of ht_mean: 2 [t phi(t) + Q(t)] + t^3 phi(t).
double ht_mean_derivative(const SdcmModel& model, const ParamVec& x, double tau, std::size_t k);

/// ln f(y; x) evaluated through the projections.
double log_likelihood(const SdcmModel& model, const Observation& y, const ParamVec& x);

/// Upper-tail probability of the standard normal.
double normal_q(double t);
double normal_pdf(double t);

}  // namespace scov
