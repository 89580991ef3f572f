#include "scov/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace scov {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::NonOrthonormalBasis: return "NonOrthonormalBasis";
    case Errc::BadRanks: return "BadRanks";
    case Errc::BadSparsity: return "BadSparsity";
    case Errc::BadNoise: return "BadNoise";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::BadIndexSet: return "BadIndexSet";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::NegativeCoefficient: return "NegativeCoefficient";
    case Errc::DuplicateMultiIndex: return "DuplicateMultiIndex";
    case Errc::MissingDerivative: return "MissingDerivative";
    case Errc::NotApplicable: return "NotApplicable";
    case Errc::UnsupportedOrder: return "UnsupportedOrder";
    case Errc::BadConfig: return "BadConfig";
    case Errc::IndefiniteArgument: return "IndefiniteArgument";
    case Errc::SingularCovariance: return "SingularCovariance";
    case Errc::DomainViolation: return "DomainViolation";
    case Errc::DivergentSeries: return "DivergentSeries";
  }
  return "UnknownError";
}

bool is_config_error(Errc code) noexcept {
  switch (code) {
    case Errc::IndefiniteArgument:
    case Errc::SingularCovariance:
    case Errc::DomainViolation:
    case Errc::DivergentSeries:
      return false;
    default:
      return true;
  }
}

ParamVec::ParamVec(std::vector<double> entries) : x_(std::move(entries)) {
  for (std::size_t k = 0; k < x_.size(); ++k) {
    if (!(x_[k] >= 0.0) || !std::isfinite(x_[k]))
      throw Error(Errc::NegativeCoefficient,
                  "coefficient " + std::to_string(k + 1) + " = " + std::to_string(x_[k]));
  }
}

std::size_t ParamVec::l0() const noexcept {
  return static_cast<std::size_t>(std::count_if(x_.begin(), x_.end(), [](double v) { return v != 0.0; }));
}

IndexSet ParamVec::support() const {
  IndexSet s;
  for (std::size_t k = 0; k < x_.size(); ++k)
    if (x_[k] != 0.0) s.push_back(k);
  return s;
}

ParamVec ParamVec::with(std::size_t k, double value) const {
  auto copy = x_;
  copy.at(k) = value;
  return ParamVec(std::move(copy));
}

SdcmModel validate_model(const ModelSpec& raw) {
  if (!(raw.sigma2 > 0.0) || !std::isfinite(raw.sigma2))
    throw Error(Errc::BadNoise, "sigma2 must be positive, got " + std::to_string(raw.sigma2));
  if (raw.ranks.size() != raw.N)
    throw Error(Errc::BadRanks, "ranks has " + std::to_string(raw.ranks.size()) +
                                    " entries but N = " + std::to_string(raw.N));
  if (raw.N == 0) throw Error(Errc::BadRanks, "N must be at least 1");
  if (raw.S < 1 || raw.S > raw.N)
    throw Error(Errc::BadSparsity, "S = " + std::to_string(raw.S) + " outside [1, N]");

  for (std::size_t k = 0; k < raw.N; ++k)
    if (raw.ranks[k] < 1) throw Error(Errc::BadRanks, "rank of group " + std::to_string(k + 1) + " is 0");
  const std::size_t assigned = std::accumulate(raw.ranks.begin(), raw.ranks.end(), std::size_t{0});

  SdcmModel m;
  m.S_ = raw.S;
  m.sigma2_ = raw.sigma2;
  m.ranks_ = raw.ranks;
  m.assigned_ = assigned;

  std::size_t M = 0;
  if (raw.basis) {
    const auto& U = *raw.basis;
    if (U.rows() != U.cols() || U.rows() == 0)
      throw Error(Errc::NonOrthonormalBasis, "basis must be a nonempty square matrix");
    M = static_cast<std::size_t>(U.rows());
    if (raw.M != 0 && raw.M != M)
      throw Error(Errc::DimensionMismatch, "M = " + std::to_string(raw.M) + " but basis is " +
                                               std::to_string(M) + "x" + std::to_string(M));
    const Eigen::MatrixXd gram = U.transpose() * U;
    const double dev = (gram - Eigen::MatrixXd::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff();
    if (!(dev <= kOrthonormalTol))
      throw Error(Errc::NonOrthonormalBasis,
                  "max |u_i^T u_j - delta_ij| = " + std::to_string(dev));
    m.basis_ = U;
    m.identity_ = (U - Eigen::MatrixXd::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff() == 0.0;
  } else {
    M = raw.M == 0 ? assigned : raw.M;
    m.basis_ = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
    m.identity_ = true;
  }
  if (assigned > M)
    throw Error(Errc::BadRanks, "sum of ranks " + std::to_string(assigned) + " exceeds M = " + std::to_string(M));

  if (raw.groups) {
    const auto& g = *raw.groups;
    if (g.size() != raw.N) throw Error(Errc::BadRanks, "groups must list one column set per coefficient");
    std::vector<bool> used(M, false);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (g[k].size() != raw.ranks[k])
        throw Error(Errc::BadRanks, "group " + std::to_string(k + 1) + " has " + std::to_string(g[k].size()) +
                                        " columns but rank " + std::to_string(raw.ranks[k]));
      for (std::size_t col : g[k]) {
        if (col >= M) throw Error(Errc::BadRanks, "group column " + std::to_string(col + 1) + " exceeds M");
        if (used[col]) throw Error(Errc::BadRanks, "column " + std::to_string(col + 1) + " is in two groups");
        used[col] = true;
      }
    }
    m.groups_ = g;
  } else {
    std::size_t next = 0;
    m.groups_.resize(raw.N);
    for (std::size_t k = 0; k < raw.N; ++k)
      for (std::size_t i = 0; i < raw.ranks[k]; ++i) m.groups_[k].push_back(next++);
  }
  return m;
}

SdcmModel identity_model(std::size_t N, std::size_t S, double sigma2, std::vector<std::size_t> ranks) {
  ModelSpec spec;
  spec.N = N;
  spec.S = S;
  spec.sigma2 = sigma2;
  spec.ranks = ranks.empty() ? std::vector<std::size_t>(N, 1) : std::move(ranks);
  return validate_model(spec);
}

Eigen::MatrixXd covariance_tilde(const SdcmModel& model, const ParamVec& x) {
  if (x.size() != model.N())
    throw Error(Errc::DimensionMismatch,
                "x has " + std::to_string(x.size()) + " entries, model has N = " + std::to_string(model.N()));
  const auto M = static_cast<Eigen::Index>(model.M());
  Eigen::VectorXd eig = Eigen::VectorXd::Constant(M, model.sigma2());
  for (std::size_t k = 0; k < model.N(); ++k)
    for (std::size_t col : model.groups()[k]) eig[static_cast<Eigen::Index>(col)] = x[k] + model.sigma2();
  const auto& U = model.basis();
  Eigen::MatrixXd C = U * eig.asDiagonal() * U.transpose();
  return 0.5 * (C + C.transpose());
}

bool in_domain_D(const ParamVec& x0, const ParamVec& x, double sigma2, std::size_t S) {
  if (x0.size() != x.size())
    throw Error(Errc::DimensionMismatch, "x0 and x differ in length");
  if (!x.in_sparse_set(S)) return false;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (!(x[k] < 2.0 * x0[k] + sigma2)) return false;
  return true;
}

SthLargest xi_and_j0(const ParamVec& x0, std::size_t S) {
  if (S == 0 || S > x0.size()) throw Error(Errc::BadSparsity, "S outside [1, N]");
  if (x0.l0() < S) return {};
  std::vector<std::size_t> order(x0.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x0[a] > x0[b]; });
  const std::size_t j0 = order[S - 1];
  return {x0[j0], j0};
}

void check_index_set(const IndexSet& K, std::size_t n, std::size_t size) {
  if (K.size() != size)
    throw Error(Errc::BadIndexSet, "index set has " + std::to_string(K.size()) + " entries, expected " +
                                       std::to_string(size));
  std::vector<bool> seen(n, false);
  for (std::size_t k : K) {
    if (k >= n) throw Error(Errc::BadIndexSet, "index " + std::to_string(k + 1) + " out of range");
    if (seen[k]) throw Error(Errc::BadIndexSet, "index " + std::to_string(k + 1) + " repeated");
    seen[k] = true;
  }
}

ParamVec restrict_support(const ParamVec& x0, const IndexSet& K, std::size_t S) {
  check_index_set(K, x0.size(), S);
  std::vector<double> out(x0.size(), 0.0);
  for (std::size_t k : K) out[k] = x0[k];
  return ParamVec(std::move(out));
}

}  // namespace scov
