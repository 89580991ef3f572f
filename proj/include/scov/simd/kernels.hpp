#pragma once

// Data-parallel inner loops of the Monte Carlo engine.
//
// Every kernel has a scalar reference and optional SIMD variants. Variants
// must be bit-identical to the reference: element-wise kernels use the same
// operations without contraction, and reductions accumulate into four
// interleaved lanes (element i goes to lane i % 4) which are combined as
// (l0 + l1) + (l2 + l3). The signatures use raw pointers so that no inline
// library code is instantiated inside the ISA-specific translation units.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace scov::simd {

struct PowerSums {
  double s1, s2, s3, s4;  // sum e, e^2, e^3, e^4 with e = x - shift
};

struct CrossSums {
  double s11, s21, s12, s22;  // sum ex ey, ex^2 ey, ex ey^2, ex^2 ey^2
};

struct KernelTable {
  const char* name;

  /// Philox4x32-10 on counters (lo32(first+i), hi32(first+i), c2, c3);
  /// word j of block i goes to out_j[i].
  void (*philox4x32)(std::uint32_t key0, std::uint32_t key1, std::uint64_t first, std::uint32_t c2,
                     std::uint32_t c3, std::size_t n, std::uint32_t* out0, std::uint32_t* out1,
                     std::uint32_t* out2, std::uint32_t* out3);

  /// out[i] = a * in[i] + b
  void (*affine)(const double* in, double a, double b, double* out, std::size_t n);

  /// acc[i] += |in[i]| >= tau ? in[i]^2 : 0
  void (*threshold_square_add)(const double* in, double tau, double* acc, std::size_t n);

  PowerSums (*power_sums)(const double* x, double shift, std::size_t n);

  CrossSums (*cross_sums)(const double* x, double shift_x, const double* y, double shift_y, std::size_t n);
};

enum class Backend { Scalar, Avx2 };

std::string_view backend_name(Backend b) noexcept;

const KernelTable& scalar_kernels() noexcept;

/// nullptr when the AVX2 variants were not compiled in.
const KernelTable* avx2_kernels() noexcept;

bool cpu_supports(Backend b) noexcept;

/// Kernels in use. On first call the backend is chosen from SCOV_SIMD
/// ("scalar", "avx2" or "auto"/unset: best supported).
const KernelTable& active() noexcept;
Backend active_backend() noexcept;

/// Throws std::invalid_argument if the backend is not available here.
void select_backend(Backend b);

std::optional<Backend> parse_backend(std::string_view name) noexcept;

}  // namespace scov::simd
