#pragma once

// Counter-based normal variates. Every draw is a pure function of
// (seed, counter), so Monte Carlo shards can be evaluated in any order.
//
// Words: Philox4x32-10 with key (lo32(seed), hi32(seed)).
// Uniforms: 52 bits from two words, u = (k + 1/2) 2^-52 in (0, 1).
// Normals: Box-Muller, one Philox block yields two variates.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include "scov/simd/kernels.hpp"

namespace scov {

inline constexpr std::string_view kRngAlgorithm = "philox4x32-10+box-muller";

/// Counter word 3 tags, keeping the Monte Carlo and single-draw streams apart.
inline constexpr std::uint32_t kMcStreamTag = 0x4D430001u;
inline constexpr std::uint32_t kSingleStreamTag = 0x53440001u;

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

inline PhiloxKey philox_key(std::uint64_t seed) noexcept {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

double uniform_open01(std::uint32_t hi, std::uint32_t lo) noexcept;

/// Normals for Monte Carlo sample indices [first, first + n) and coordinate
/// pair `pair`: z0 receives coordinate 2*pair, z1 coordinate 2*pair + 1.
/// `scratch` must hold 4 * n words.
void mc_normal_pairs(const simd::KernelTable& kernels, std::uint64_t seed, std::uint32_t pair, std::uint64_t first,
                     std::size_t n, double* z0, double* z1, std::uint32_t* scratch);

/// Sequential standard-normal draws on stream `stream` of `seed`.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint32_t stream, std::uint64_t position = 0)
      : key_(philox_key(seed)), stream_(stream), position_(position) {}

  double next();
  std::uint64_t position() const noexcept { return position_; }

 private:
  PhiloxKey key_;
  std::uint32_t stream_;
  std::uint64_t position_;  // in Philox blocks
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace scov
