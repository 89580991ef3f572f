#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scov {

enum class Errc {
  // model / configuration
  NonOrthonormalBasis,
  BadRanks,
  BadSparsity,
  BadNoise,
  DimensionMismatch,
  BadIndexSet,
  IndexOutOfRange,
  NegativeCoefficient,
  DuplicateMultiIndex,
  MissingDerivative,
  NotApplicable,
  UnsupportedOrder,
  BadConfig,
  // numeric domain
  IndefiniteArgument,
  SingularCovariance,
  DomainViolation,
  DivergentSeries,
};

std::string_view errc_name(Errc code) noexcept;

/// True for errors caused by malformed input rather than by evaluating a
/// formula outside its domain. The CLI maps these to exit code 1 (else 2).
bool is_config_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace scov
