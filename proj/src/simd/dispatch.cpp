#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "scov/simd/kernels.hpp"

namespace scov::simd {

#if defined(SCOV_HAVE_AVX2_KERNELS)
const KernelTable* avx2_kernels_impl() noexcept;
#endif

namespace {

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable* table_for(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return &scalar_kernels();
    case Backend::Avx2: return cpu_supports(Backend::Avx2) ? avx2_kernels() : nullptr;
  }
  return nullptr;
}

const KernelTable* choose_default() noexcept {
  if (const char* env = std::getenv("SCOV_SIMD")) {
    if (auto b = parse_backend(env)) {
      if (auto* t = table_for(*b)) return t;
    }
  }
  if (auto* t = table_for(Backend::Avx2)) return t;
  return &scalar_kernels();
}

}  // namespace

std::string_view backend_name(Backend b) noexcept {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

std::optional<Backend> parse_backend(std::string_view name) noexcept {
  if (name == "scalar") return Backend::Scalar;
  if (name == "avx2") return Backend::Avx2;
  return std::nullopt;
}

const KernelTable* avx2_kernels() noexcept {
#if defined(SCOV_HAVE_AVX2_KERNELS)
  return avx2_kernels_impl();
#else
  return nullptr;
#endif
}

bool cpu_supports(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2:
#if defined(SCOV_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& active() noexcept {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    const KernelTable* chosen = choose_default();
    g_active.compare_exchange_strong(t, chosen, std::memory_order_acq_rel);
    t = g_active.load(std::memory_order_acquire);
  }
  return *t;
}

Backend active_backend() noexcept {
  return &active() == avx2_kernels() ? Backend::Avx2 : Backend::Scalar;
}

void select_backend(Backend b) {
  const KernelTable* t = table_for(b);
  if (t == nullptr)
    throw std::invalid_argument("SIMD backend '" + std::string(backend_name(b)) + "' is not available");
  g_active.store(t, std::memory_order_release);
}

}  // namespace scov::simd
