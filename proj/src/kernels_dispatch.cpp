#include <cstdlib>
#include <string_view>

#include "specreg/kernels.hpp"

namespace specreg::kernels {

#ifdef SPECREG_HAVE_AVX2
namespace avx2 {
const KernelTable& table();
}
#endif

const KernelTable* avx2_kernels() {
#ifdef SPECREG_HAVE_AVX2
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2::table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  static const KernelTable& chosen = [] () -> const KernelTable& {
    const char* forced = std::getenv("SPECREG_KERNELS");
    if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_kernels();
    if (const KernelTable* vec = avx2_kernels()) return *vec;
    return scalar_kernels();
  }();
  return chosen;
}

}  // namespace specreg::kernels
