#pragma once

#include <cstddef>
#include <vector>

#include "scov/kernel.hpp"
#include "scov/model.hpp"

namespace scov {

struct BoundRequest {
  KernelContext ctx;
  IndexSet K;
  std::vector<MultiIndex> multis;
  MeanSpec mean;
};

struct BoundResult {
  double value = 0.0;
  /// |d^{p_l} gamma|^2 / q_l, in the order of BoundRequest::multis.
  std::vector<double> terms;
  double gamma0_sq = 0.0;
};

/// Variance lower bound
///   sum_l |d^{p_l} gamma(x0^K)|^2 / q_l(x0) - gamma(x0)^2
/// for any estimator whose mean function is gamma on X_{S,+}.
/// Throws DuplicateMultiIndex, MissingDerivative, BadIndexSet, or a kernel error.
BoundResult theorem_bound(const BoundRequest& req);

/// K = {k} together with the indices of the S-1 largest entries of x0 after
/// zeroing entry k (ties: lowest index). Returned sorted.
IndexSet unbiased_index_set(const ParamVec& x0, std::size_t k, std::size_t S);

/// Closed-form bound for unbiased estimation of x_k:
///   k in supp(x0):  (2/r_k)(x0_k + sigma2)^2
///   otherwise:      (2/r_k) sigma2^2 [(xi+sigma2)^2 - xi^2]^{r_j0/2} / (xi+sigma2)^{r_j0}
/// with xi, j0 the S-th largest entry of x0 (when xi = 0 the second case is (2/r_k) sigma2^2).
double corollary_unbiased_bound(const SdcmModel& model, const ParamVec& x0, std::size_t k);

/// Mean data for gamma(x) = x_k with multi-indices {0, e_k}.
MeanSpec unbiased_mean_spec(const ParamVec& x0, const IndexSet& K, std::size_t k);

}  // namespace scov
