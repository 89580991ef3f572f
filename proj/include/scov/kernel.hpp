#pragma once

// Reproducing kernel R(x1, x2) = E_{x0}[rho_{x1}(y) rho_{x2}(y)] of the
// likelihood-ratio family rho_x = f(y; x) / f(y; x0), and the derivative
// factors q_l that normalise the partial-derivative functions v_l.

#include <cstddef>
#include <span>
#include <vector>

#include "scov/model.hpp"
#include "scov/multi_index.hpp"

namespace scov {

/// Anchor-dependent constants of the kernel. For the SDCM the kernel is a
/// product over coordinates of (c_k / (c_k - d1_k d2_k))^{m_k}, with
/// c_k = (x0_k + sigma2)^2, m_k = r_k / 2 and d_k = x_k - x0_k.
class KernelContext {
 public:
  KernelContext(SdcmModel model, ParamVec x0);

  const SdcmModel& model() const noexcept { return model_; }
  const ParamVec& x0() const noexcept { return x0_; }
  double c(std::size_t k) const { return c_.at(k); }
  double m(std::size_t k) const { return m_.at(k); }

 private:
  SdcmModel model_;
  ParamVec x0_;
  std::vector<double> c_;
  std::vector<double> m_;
};

/// Determinant form, valid for any orthonormal basis:
///   det(C0)^{1/2} det(C1 C2 (C1^{-1} + C2^{-1} - C0^{-1}))^{-1/2}.
/// Throws IndefiniteArgument when C1^{-1} + C2^{-1} - C0^{-1} is not
/// positive definite, SingularCovariance when some C is not.
/// Points are not checked against the domain D; use in_domain_D.
double kernel_general(const KernelContext& ctx, std::span<const double> x1, std::span<const double> x2);

/// Closed form for the SDCM. Throws DomainViolation if some
/// (x1_k - x0_k)(x2_k - x0_k) >= c_k.
double kernel_sdcm(const KernelContext& ctx, std::span<const double> x1, std::span<const double> x2);

/// d^p/da^p d^q/db^q [ c^m (c - (a - x0)(b - x0))^{-m} ] at a = b = x0 + s.
///
/// Evaluated through the finite Leibniz expansion
///   (m)_q c^{-q} sum_{j<=min(p,q)} C(p,j) q!/(q-j)! (m+q)_{p-j} s^{p+q-2j} c^{-(p-j)} w^{-(m+p+q-j)}
/// with w = 1 - s^2/c. Throws DivergentSeries when s^2 >= c or c <= 0.
double coord_deriv_factor(unsigned p, unsigned q, double c, double m, double s);

/// Same quantity from the power series
///   sum_{n >= max(p,q)} (m)_n/n! c^{-n} p! q! C(n,p) C(n,q) s^{2n-p-q},
/// stopped after three consecutive relative increments below 1e-14.
/// Throws DivergentSeries if s^2 >= c or 10'000 terms are exceeded.
double coord_deriv_series(unsigned p, unsigned q, double c, double m, double s);

inline constexpr double kSeriesRelTol = 1e-14;
inline constexpr int kSeriesMaxTerms = 10'000;

/// q_l = d^p d^p R / dx1^p dx2^p at x1 = x2 = x0^K (strictly positive).
/// Requires |K| = S and supp(p) within K.
double q_factor(const KernelContext& ctx, const IndexSet& K, const MultiIndex& p);

}  // namespace scov
