#include "scov/philox.hpp"

#include <cmath>
#include <numbers>

#include "simd/philox_round.hpp"

namespace scov {
namespace {

inline void box_muller(std::uint32_t w0, std::uint32_t w1, std::uint32_t w2, std::uint32_t w3, double& z0,
                       double& z1) {
  const double u1 = uniform_open01(w0, w1);
  const double u2 = uniform_open01(w2, w3);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  z0 = r * std::cos(theta);
  z1 = r * std::sin(theta);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
  simd::detail::philox4x32_10(ctr.data(), key[0], key[1]);
  return ctr;
}

double uniform_open01(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

void mc_normal_pairs(const simd::KernelTable& kernels, std::uint64_t seed, std::uint32_t pair, std::uint64_t first,
                     std::size_t n, double* z0, double* z1, std::uint32_t* scratch) {
  const PhiloxKey key = philox_key(seed);
  std::uint32_t* w0 = scratch;
  std::uint32_t* w1 = scratch + n;
  std::uint32_t* w2 = scratch + 2 * n;
  std::uint32_t* w3 = scratch + 3 * n;
  kernels.philox4x32(key[0], key[1], first, pair, kMcStreamTag, n, w0, w1, w2, w3);
  for (std::size_t i = 0; i < n; ++i) box_muller(w0[i], w1[i], w2[i], w3[i], z0[i], z1[i]);
}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const PhiloxCounter out = philox4x32_10(
      {static_cast<std::uint32_t>(position_), static_cast<std::uint32_t>(position_ >> 32), stream_, kSingleStreamTag},
      key_);
  ++position_;
  double z0, z1;
  box_muller(out[0], out[1], out[2], out[3], z0, z1);
  spare_ = z1;
  has_spare_ = true;
  return z0;
}

}  // namespace scov
