#pragma once

// JSON configuration files.
//
// Model:
//   {"N": 5, "S": 1, "sigma2": 1.0, "ranks": [1, 1, 1, 1, 1],
//    "basis": "identity" | [[...], ...] (M x M, columns are u_m) | [...] (row-major),
//    "M": 5, "groups": [[1], [2], ...]}            (M, groups optional; 1-based)
//
// Sweep:
//   {"model": {...}, "j0": 1, "snr_grid_db": [-20, -18, ...],
//    "estimators": [{"kind": "ml", "rule": "exact"}, {"kind": "ht", "tau": 3}, ...],
//    "mc": {"n_samples": 1000000, "seed": 20240101, "n_shards": 16, "fd_step": 0.001},
//    "normalize": true}
//
// Errors are BadConfig with "<source>:<line>:<col>" where a position is known.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scov/estimators.hpp"
#include "scov/model.hpp"
#include "scov/simulate.hpp"

namespace scov {

enum class EstimatorKindTag { Naive, HardThreshold, MaxLikelihood, Oracle, S1Mvu };

/// Estimator as named in a sweep; bound to x0 per grid point by the sweep.
struct EstimatorSpec {
  EstimatorKindTag kind = EstimatorKindTag::Naive;
  double tau = 0.0;
  MlRule rule = MlRule::Exact;
};

struct SweepConfig {
  SdcmModel model;
  std::size_t j0 = 0;  // 0-based
  std::vector<double> snr_grid_db;
  std::vector<EstimatorSpec> estimators;
  McConfig mc;
  bool normalize = true;
};

inline constexpr std::size_t kDefaultShards = 16;

std::string read_text_file(const std::filesystem::path& path);

/// Accepts a model object, or a sweep object whose "model" member is used.
SdcmModel parse_model_config(std::string_view text, std::string_view source = "<model>");
SweepConfig parse_sweep_config(std::string_view text, std::string_view source = "<sweep>");

SdcmModel load_model_config(const std::filesystem::path& path);
SweepConfig load_sweep_config(const std::filesystem::path& path);

std::optional<EstimatorKindTag> parse_estimator_kind(std::string_view name) noexcept;
std::optional<MlRule> parse_ml_rule(std::string_view name) noexcept;

}  // namespace scov
