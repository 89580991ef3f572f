#include "scov/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace scov {

BoundResult theorem_bound(const BoundRequest& req) {
  const auto& model = req.ctx.model();
  if (req.multis.empty()) throw Error(Errc::BadConfig, "at least one multi-index is required");
  check_index_set(req.K, model.N(), model.S());

  std::set<MultiIndex> seen;
  for (const auto& p : req.multis)
    if (!seen.insert(p).second) throw Error(Errc::DuplicateMultiIndex, "multi-index " + p.to_string() + " repeated");

  BoundResult out;
  out.terms.reserve(req.multis.size());
  double sum = 0.0;
  for (const auto& p : req.multis) {
    const auto it = req.mean.derivs.find(p);
    if (it == req.mean.derivs.end())
      throw Error(Errc::MissingDerivative, "no mean derivative for multi-index " + p.to_string());
    const double q = q_factor(req.ctx, req.K, p);
    const double term = it->second * it->second / q;
    out.terms.push_back(term);
    sum += term;
  }
  out.gamma0_sq = req.mean.gamma_at_x0 * req.mean.gamma_at_x0;
  out.value = sum - out.gamma0_sq;
  return out;
}

IndexSet unbiased_index_set(const ParamVec& x0, std::size_t k, std::size_t S) {
  const std::size_t n = x0.size();
  if (k >= n) throw Error(Errc::IndexOutOfRange, "component " + std::to_string(k + 1) + " out of range");
  if (S < 1 || S > n) throw Error(Errc::BadSparsity, "S outside [1, N]");
  std::vector<std::size_t> others;
  for (std::size_t j = 0; j < n; ++j)
    if (j != k) others.push_back(j);
  std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) { return x0[a] > x0[b]; });
  IndexSet K{k};
  K.insert(K.end(), others.begin(), others.begin() + static_cast<std::ptrdiff_t>(S - 1));
  std::sort(K.begin(), K.end());
  return K;
}

double corollary_unbiased_bound(const SdcmModel& model, const ParamVec& x0, std::size_t k) {
  if (x0.size() != model.N()) throw Error(Errc::DimensionMismatch, "x0 length differs from N");
  if (k >= model.N()) throw Error(Errc::IndexOutOfRange, "component " + std::to_string(k + 1) + " out of range");
  const double s2 = model.sigma2();
  const double rk = static_cast<double>(model.rank(k));
  if (x0[k] != 0.0) {
    const double v = x0[k] + s2;
    return 2.0 / rk * v * v;
  }
  const auto [xi, j0] = xi_and_j0(x0, model.S());
  // With xi = 0 the bracket equals sigma2^{r_j0}, cancelling the denominator
  // whatever r_j0 is; r_k stands in when there is no j0.
  const double rj = static_cast<double>(j0 ? model.rank(*j0) : model.rank(k));
  const double v = xi + s2;
  const double ratio = (v * v - xi * xi) / (v * v);
  return 2.0 / rk * s2 * s2 * std::pow(ratio, 0.5 * rj);
}

MeanSpec unbiased_mean_spec(const ParamVec& x0, const IndexSet& K, std::size_t k) {
  const std::size_t n = x0.size();
  if (k >= n) throw Error(Errc::IndexOutOfRange, "component " + std::to_string(k + 1) + " out of range");
  const ParamVec anchor = restrict_support(x0, K, K.size());
  MeanSpec spec;
  spec.gamma_at_x0 = x0[k];
  spec.derivs[MultiIndex::zero(n)] = anchor[k];
  spec.derivs[MultiIndex::unit(n, k)] = 1.0;
  return spec;
}

}  // namespace scov
