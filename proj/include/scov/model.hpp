#pragma once

// Sparse diagonalizable covariance model: y = s + n with
//   Cov(y) = sum_k x_k C_k + sigma2 I,   C_k = sum_i u_{m_{k,i}} u_{m_{k,i}}^T,
// where the u_m form an orthonormal basis of R^M and x has at most S nonzeros.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "scov/error.hpp"
#include "scov/multi_index.hpp"

namespace scov {

/// Nonnegative coefficient vector.
class ParamVec {
 public:
  ParamVec() = default;
  /// Throws NegativeCoefficient for entries < 0 or NaN.
  explicit ParamVec(std::vector<double> entries);

  static ParamVec zeros(std::size_t n) { return ParamVec(std::vector<double>(n, 0.0)); }

  std::size_t size() const noexcept { return x_.size(); }
  double operator[](std::size_t k) const { return x_[k]; }
  const std::vector<double>& entries() const noexcept { return x_; }
  std::span<const double> values() const noexcept { return x_; }

  std::size_t l0() const noexcept;
  IndexSet support() const;
  bool in_sparse_set(std::size_t S) const noexcept { return l0() <= S; }

  /// Copy with entry k replaced.
  ParamVec with(std::size_t k, double value) const;

  bool operator==(const ParamVec&) const = default;

 private:
  std::vector<double> x_;
};

/// Mean-function data consumed by the variance bound: gamma(x0) and the
/// partial derivatives d^p gamma / dx^p evaluated at x0^K.
struct MeanSpec {
  double gamma_at_x0 = 0.0;
  std::map<MultiIndex, double> derivs;
};

/// Unvalidated model description, as read from a config file.
struct ModelSpec {
  std::size_t N = 0;
  std::size_t S = 1;
  double sigma2 = 1.0;
  std::vector<std::size_t> ranks;
  /// Ambient dimension for the identity basis; 0 means sum of ranks.
  std::size_t M = 0;
  /// Columns u_1..u_M. Identity when absent.
  std::optional<Eigen::MatrixXd> basis;
  /// Column indices (0-based) of each group; contiguous blocks when absent.
  std::optional<std::vector<std::vector<std::size_t>>> groups;
};

class SdcmModel {
 public:
  std::size_t N() const noexcept { return ranks_.size(); }
  std::size_t S() const noexcept { return S_; }
  std::size_t M() const noexcept { return static_cast<std::size_t>(basis_.cols()); }
  double sigma2() const noexcept { return sigma2_; }

  const std::vector<std::size_t>& ranks() const noexcept { return ranks_; }
  std::size_t rank(std::size_t k) const { return ranks_.at(k); }
  /// Sum of ranks; the number of basis columns assigned to some group.
  std::size_t assigned_dim() const noexcept { return assigned_; }

  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  bool has_identity_basis() const noexcept { return identity_; }
  const std::vector<std::vector<std::size_t>>& groups() const noexcept { return groups_; }

 private:
  friend SdcmModel validate_model(const ModelSpec& raw);
  SdcmModel() = default;

  std::size_t S_ = 1;
  double sigma2_ = 1.0;
  std::vector<std::size_t> ranks_;
  std::size_t assigned_ = 0;
  Eigen::MatrixXd basis_;
  bool identity_ = true;
  std::vector<std::vector<std::size_t>> groups_;
};

inline constexpr double kOrthonormalTol = 1e-12;

/// Returns the model iff every invariant holds; otherwise throws
/// NonOrthonormalBasis, BadRanks, BadSparsity or BadNoise.
SdcmModel validate_model(const ModelSpec& raw);

/// Identity-basis model with contiguous groups. Ranks default to all ones.
SdcmModel identity_model(std::size_t N, std::size_t S, double sigma2,
                         std::vector<std::size_t> ranks = {});

/// sum_k x_k C_k + sigma2 I (dense M x M).
Eigen::MatrixXd covariance_tilde(const SdcmModel& model, const ParamVec& x);

/// x in X_{S,+} and x_k < 2 x0_k + sigma2 for every k.
bool in_domain_D(const ParamVec& x0, const ParamVec& x, double sigma2, std::size_t S);

struct SthLargest {
  double xi = 0.0;
  std::optional<std::size_t> j0;
};

/// Value and index of the S-th largest entry (ties: lowest index first).
/// When x0 has fewer than S nonzeros the value is 0 and there is no index.
SthLargest xi_and_j0(const ParamVec& x0, std::size_t S);

/// x0^K: entries outside K set to zero. Requires |K| = S, indices < N.
ParamVec restrict_support(const ParamVec& x0, const IndexSet& K, std::size_t S);

/// Throws BadIndexSet unless K is sorted, duplicate free, in range and |K| == size.
void check_index_set(const IndexSet& K, std::size_t n, std::size_t size);

}  // namespace scov
