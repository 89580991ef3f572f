#pragma once

// Variance and bound versus SNR for a list of estimators.
//
// At each grid point x0 = xi0 e_j0 with xi0 = sigma2 10^(snr_db / 10). The
// variance is the Monte Carlo total over all components; the bound is the
// sum over k of theorem_bound with K = unbiased_index_set(x0, k, S) and
// multi-indices {0, e_k}, fed with the estimator's mean function.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scov/config.hpp"
#include "scov/estimators.hpp"

namespace scov {

struct SweepRow {
  double snr_db = 0.0;
  std::string estimator;
  std::optional<double> tau;
  double variance = 0.0;
  double variance_stderr = 0.0;
  double bound = 0.0;
  std::optional<double> normalized_variance;
  std::optional<double> normalized_bound;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
};

inline constexpr const char* kCsvHeader =
    "snr_db,estimator,tau,variance,variance_stderr,bound,normalized_variance,normalized_bound,n_samples,seed";

/// x0 for one grid point.
ParamVec sweep_anchor(const SweepConfig& cfg, double snr_db);

/// (2 / r_j0) (xi0 + sigma2)^2, the variance of the oracle that knows j0.
double sweep_normalizer(const SweepConfig& cfg, double snr_db);

EstimateFn make_estimator(const SweepConfig& cfg, const EstimatorSpec& spec, const ParamVec& x0);

/// Rows in (snr ascending, estimator as configured) order. Rows whose bound
/// exceeds variance + 3 stderr are reported through `warnings`.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg, std::vector<std::string>* warnings = nullptr);

/// %.9g
std::string format_float(double v);

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Sidecar JSON recording the generator and Monte Carlo settings.
void write_meta(std::ostream& out, const SweepConfig& cfg);

}  // namespace scov
