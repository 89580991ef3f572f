#include <cmath>

#include "philox_round.hpp"
#include "scov/simd/kernels.hpp"

namespace scov::simd {
namespace {

void philox_scalar(std::uint32_t key0, std::uint32_t key1, std::uint64_t first, std::uint32_t c2,
                   std::uint32_t c3, std::size_t n, std::uint32_t* out0, std::uint32_t* out1,
                   std::uint32_t* out2, std::uint32_t* out3) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t ctr = first + i;
    std::uint32_t x[4] = {static_cast<std::uint32_t>(ctr), static_cast<std::uint32_t>(ctr >> 32), c2, c3};
    detail::philox4x32_10(x, key0, key1);
    out0[i] = x[0];
    out1[i] = x[1];
    out2[i] = x[2];
    out3[i] = x[3];
  }
}

void affine_scalar(const double* in, double a, double b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = a * in[i];
    out[i] = t + b;
  }
}

void threshold_square_add_scalar(const double* in, double tau, double* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = in[i];
    const double sq = v * v;
    acc[i] = acc[i] + (std::fabs(v) >= tau ? sq : 0.0);
  }
}

PowerSums power_sums_scalar(const double* x, double shift, std::size_t n) {
  double a1[4] = {0, 0, 0, 0}, a2[4] = {0, 0, 0, 0}, a3[4] = {0, 0, 0, 0}, a4[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = i & 3u;
    const double e = x[i] - shift;
    const double e2 = e * e;
    a1[l] = a1[l] + e;
    a2[l] = a2[l] + e2;
    a3[l] = a3[l] + e2 * e;
    a4[l] = a4[l] + e2 * e2;
  }
  return {(a1[0] + a1[1]) + (a1[2] + a1[3]), (a2[0] + a2[1]) + (a2[2] + a2[3]),
          (a3[0] + a3[1]) + (a3[2] + a3[3]), (a4[0] + a4[1]) + (a4[2] + a4[3])};
}

CrossSums cross_sums_scalar(const double* x, double sx, const double* y, double sy, std::size_t n) {
  double a11[4] = {0, 0, 0, 0}, a21[4] = {0, 0, 0, 0}, a12[4] = {0, 0, 0, 0}, a22[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = i & 3u;
    const double ex = x[i] - sx;
    const double ey = y[i] - sy;
    const double ex2 = ex * ex;
    const double ey2 = ey * ey;
    a11[l] = a11[l] + ex * ey;
    a21[l] = a21[l] + ex2 * ey;
    a12[l] = a12[l] + ex * ey2;
    a22[l] = a22[l] + ex2 * ey2;
  }
  return {(a11[0] + a11[1]) + (a11[2] + a11[3]), (a21[0] + a21[1]) + (a21[2] + a21[3]),
          (a12[0] + a12[1]) + (a12[2] + a12[3]), (a22[0] + a22[1]) + (a22[2] + a22[3])};
}

constexpr KernelTable kScalar{
    "scalar", philox_scalar, affine_scalar, threshold_square_add_scalar, power_sums_scalar, cross_sums_scalar,
};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace scov::simd
