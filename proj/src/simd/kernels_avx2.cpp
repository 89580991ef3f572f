// AVX2 variants. Compiled with -mavx2 only; selected at runtime after a CPU
// check, so nothing here may be reachable from generic code paths.

#include <immintrin.h>

#include "philox_round.hpp"
#include "scov/simd/kernels.hpp"

namespace scov::simd {
namespace {

// 32x32 -> 64 multiply of all eight lanes, split into hi and lo halves.
inline void mulhilo8(__m256i a, __m256i m, __m256i& hi, __m256i& lo) {
  const __m256i even = _mm256_mul_epu32(a, m);
  const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), m);
  lo = _mm256_blend_epi32(even, _mm256_slli_epi64(odd, 32), 0xAA);
  hi = _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0xAA);
}

void philox_avx2(std::uint32_t key0, std::uint32_t key1, std::uint64_t first, std::uint32_t c2, std::uint32_t c3,
                 std::size_t n, std::uint32_t* out0, std::uint32_t* out1, std::uint32_t* out2,
                 std::uint32_t* out3) {
  const __m256i m0 = _mm256_set1_epi32(static_cast<int>(detail::kPhiloxM0));
  const __m256i m1 = _mm256_set1_epi32(static_cast<int>(detail::kPhiloxM1));
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    alignas(32) std::uint32_t lo32[8], hi32[8];
    for (int l = 0; l < 8; ++l) {
      const std::uint64_t ctr = first + i + static_cast<std::uint64_t>(l);
      lo32[l] = static_cast<std::uint32_t>(ctr);
      hi32[l] = static_cast<std::uint32_t>(ctr >> 32);
    }
    __m256i x0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(lo32));
    __m256i x1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(hi32));
    __m256i x2 = _mm256_set1_epi32(static_cast<int>(c2));
    __m256i x3 = _mm256_set1_epi32(static_cast<int>(c3));
    std::uint32_t k0 = key0, k1 = key1;
    for (int round = 0; round < 10; ++round) {
      __m256i hi0, lo0, hi1, lo1;
      mulhilo8(x0, m0, hi0, lo0);
      mulhilo8(x2, m1, hi1, lo1);
      const __m256i kv0 = _mm256_set1_epi32(static_cast<int>(k0));
      const __m256i kv1 = _mm256_set1_epi32(static_cast<int>(k1));
      x0 = _mm256_xor_si256(_mm256_xor_si256(hi1, x1), kv0);
      x1 = lo1;
      x2 = _mm256_xor_si256(_mm256_xor_si256(hi0, x3), kv1);
      x3 = lo0;
      k0 += detail::kPhiloxW0;
      k1 += detail::kPhiloxW1;
    }
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out0 + i), x0);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out1 + i), x1);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out2 + i), x2);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out3 + i), x3);
  }
  for (; i < n; ++i) {
    const std::uint64_t ctr = first + i;
    std::uint32_t x[4] = {static_cast<std::uint32_t>(ctr), static_cast<std::uint32_t>(ctr >> 32), c2, c3};
    detail::philox4x32_10(x, key0, key1);
    out0[i] = x[0];
    out1[i] = x[1];
    out2[i] = x[2];
    out3[i] = x[3];
  }
}

void affine_avx2(const double* in, double a, double b, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(in + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(t, vb));
  }
  for (; i < n; ++i) {
    const double t = a * in[i];
    out[i] = t + b;
  }
}

void threshold_square_add_avx2(const double* in, double tau, double* acc, std::size_t n) {
  const __m256d vtau = _mm256_set1_pd(tau);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(in + i);
    const __m256d sq = _mm256_mul_pd(v, v);
    const __m256d keep = _mm256_cmp_pd(_mm256_andnot_pd(sign, v), vtau, _CMP_GE_OQ);
    const __m256d add = _mm256_and_pd(keep, sq);
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), add));
  }
  for (; i < n; ++i) {
    const double v = in[i];
    const double sq = v * v;
    const double av = v < 0.0 ? -v : v;
    acc[i] = acc[i] + (av >= tau ? sq : 0.0);
  }
}

inline double combine(__m256d v) {
  alignas(32) double l[4];
  _mm256_store_pd(l, v);
  return (l[0] + l[1]) + (l[2] + l[3]);
}

PowerSums power_sums_avx2(const double* x, double shift, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(shift);
  __m256d a1 = _mm256_setzero_pd(), a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd(), a4 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d e = _mm256_sub_pd(_mm256_loadu_pd(x + i), vs);
    const __m256d e2 = _mm256_mul_pd(e, e);
    a1 = _mm256_add_pd(a1, e);
    a2 = _mm256_add_pd(a2, e2);
    a3 = _mm256_add_pd(a3, _mm256_mul_pd(e2, e));
    a4 = _mm256_add_pd(a4, _mm256_mul_pd(e2, e2));
  }
  if (i == n) return {combine(a1), combine(a2), combine(a3), combine(a4)};
  alignas(32) double l1[4], l2[4], l3[4], l4[4];
  _mm256_store_pd(l1, a1);
  _mm256_store_pd(l2, a2);
  _mm256_store_pd(l3, a3);
  _mm256_store_pd(l4, a4);
  for (std::size_t l = 0; i < n; ++i, ++l) {
    const double e = x[i] - shift;
    const double e2 = e * e;
    l1[l] = l1[l] + e;
    l2[l] = l2[l] + e2;
    l3[l] = l3[l] + e2 * e;
    l4[l] = l4[l] + e2 * e2;
  }
  return {(l1[0] + l1[1]) + (l1[2] + l1[3]), (l2[0] + l2[1]) + (l2[2] + l2[3]),
          (l3[0] + l3[1]) + (l3[2] + l3[3]), (l4[0] + l4[1]) + (l4[2] + l4[3])};
}

CrossSums cross_sums_avx2(const double* x, double sx, const double* y, double sy, std::size_t n) {
  const __m256d vsx = _mm256_set1_pd(sx);
  const __m256d vsy = _mm256_set1_pd(sy);
  __m256d a11 = _mm256_setzero_pd(), a21 = _mm256_setzero_pd(), a12 = _mm256_setzero_pd(),
          a22 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ex = _mm256_sub_pd(_mm256_loadu_pd(x + i), vsx);
    const __m256d ey = _mm256_sub_pd(_mm256_loadu_pd(y + i), vsy);
    const __m256d ex2 = _mm256_mul_pd(ex, ex);
    const __m256d ey2 = _mm256_mul_pd(ey, ey);
    a11 = _mm256_add_pd(a11, _mm256_mul_pd(ex, ey));
    a21 = _mm256_add_pd(a21, _mm256_mul_pd(ex2, ey));
    a12 = _mm256_add_pd(a12, _mm256_mul_pd(ex, ey2));
    a22 = _mm256_add_pd(a22, _mm256_mul_pd(ex2, ey2));
  }
  if (i == n) return {combine(a11), combine(a21), combine(a12), combine(a22)};
  alignas(32) double l11[4], l21[4], l12[4], l22[4];
  _mm256_store_pd(l11, a11);
  _mm256_store_pd(l21, a21);
  _mm256_store_pd(l12, a12);
  _mm256_store_pd(l22, a22);
  for (std::size_t l = 0; i < n; ++i, ++l) {
    const double ex = x[i] - sx;
    const double ey = y[i] - sy;
    const double ex2 = ex * ex;
    const double ey2 = ey * ey;
    l11[l] = l11[l] + ex * ey;
    l21[l] = l21[l] + ex2 * ey;
    l12[l] = l12[l] + ex * ey2;
    l22[l] = l22[l] + ex2 * ey2;
  }
  return {(l11[0] + l11[1]) + (l11[2] + l11[3]), (l21[0] + l21[1]) + (l21[2] + l21[3]),
          (l12[0] + l12[1]) + (l12[2] + l12[3]), (l22[0] + l22[1]) + (l22[2] + l22[3])};
}

constexpr KernelTable kAvx2{
    "avx2", philox_avx2, affine_avx2, threshold_square_add_avx2, power_sums_avx2, cross_sums_avx2,
};

}  // namespace

const KernelTable* avx2_kernels_impl() noexcept { return &kAvx2; }

}  // namespace scov::simd
