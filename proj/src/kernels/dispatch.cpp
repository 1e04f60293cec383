#include "kernels_impl.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace cqed::kernels {
namespace {

const KernelTable kScalar{
    Isa::scalar,           "scalar",
    detail::gemm_scalar,   detail::gemv_scalar,
    detail::axpy_scalar,   detail::scaled_max_error_scalar,
    detail::norm_sq_scalar,
};

#if defined(CQED_HAVE_AVX2_KERNELS)
const KernelTable kAvx2{
    Isa::avx2,           "avx2",
    detail::gemm_avx2,   detail::gemv_avx2,
    detail::axpy_avx2,   detail::scaled_max_error_avx2,
    detail::norm_sq_avx2,
};

bool cpu_has_avx2() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

const KernelTable* pick_default() {
  const char* env = std::getenv("CQED_KERNELS");
  if (env != nullptr && std::string_view(env) == "scalar") return &kScalar;
  if (const KernelTable* t = avx2_table()) return t;
  return &kScalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{pick_default()};
  return table;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(CQED_HAVE_AVX2_KERNELS)
  static const bool ok = cpu_has_avx2();
  return ok ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(Isa isa) {
  const KernelTable* t = isa == Isa::scalar ? &kScalar : avx2_table();
  if (t == nullptr) return false;
  current().store(t, std::memory_order_release);
  return true;
}

std::string_view isa_name(Isa isa) { return isa == Isa::scalar ? "scalar" : "avx2"; }

}  // namespace cqed::kernels
