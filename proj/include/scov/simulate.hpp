#pragma once

// Seeded Monte Carlo for estimator means and variances.
//
// Sample i of a run draws one standard normal g_{i,m} per assigned basis
// coordinate m from Philox counter (i, m / 2, tag) under key seed; the
// projection of y onto u_m is then sqrt(x_k + sigma2) g_{i,m}, which has
// the law of u_m^T y under N(0, C(x)). Because the draws do not depend on
// x, runs at different x with the same seed share their random numbers.
//
// Samples are processed in fixed blocks of kMcBlock. Each block reduces to
// shifted power sums, and the block partials are added in block order, so a
// report depends on (seed, n_samples) only.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scov/estimators.hpp"
#include "scov/model.hpp"
#include "scov/multi_index.hpp"
#include "scov/philox.hpp"

namespace scov {

inline constexpr std::size_t kMcBlock = 4096;

struct McConfig {
  std::uint64_t n_samples = 1'000'000;
  std::uint64_t seed = 0;
  std::size_t n_shards = 1;
  double fd_step = 1e-3;
};

struct McReport {
  std::vector<double> mean;
  double var_total = 0.0;
  std::vector<double> var_per_k;
  std::vector<double> stderr_mean;
  std::vector<double> stderr_var;
  double stderr_var_total = 0.0;
  std::uint64_t n = 0;
};

/// One draw y = sum_k sqrt(x_k) sum_i z_{k,i} u_{m_{k,i}} + sigma w.
Observation sample_observation(const SdcmModel& model, const ParamVec& x, NormalStream& rng);

/// Throws BadConfig if n_samples = 0 or n_shards is 0 or exceeds n_samples.
void check_mc_config(const McConfig& cfg);

McReport mc_mean_variance(const EstimateFn& est, const SdcmModel& model, const ParamVec& x, const McConfig& cfg);

/// d^p E_x[est(y)] at x = base, for every component, from common-random-number
/// finite differences with step h_k = fd_step (1 + base_k). Central stencils
/// where base_k >= h_k, second-order forward stencils otherwise.
/// Throws UnsupportedOrder if |p| > 2.
std::vector<double> mean_derivative_fd(const EstimateFn& est, const SdcmModel& model, const ParamVec& base,
                                       const MultiIndex& p, const McConfig& cfg);

/// Worker threads: SCOV_THREADS if set to a positive value, else the
/// hardware concurrency.
std::size_t worker_count();

}  // namespace scov
