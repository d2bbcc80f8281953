#include <cstdlib>
#include <string_view>

#include "inband/kernels/kernels.hpp"

namespace inband::kernels {

#if defined(INBAND_HAVE_AVX2)
const KernelTable* avx2_table();
#endif

const KernelTable* avx2() {
#if defined(INBAND_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable* table = [] {
    const char* forced = std::getenv("INBAND_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return &scalar();
    const KernelTable* vec = avx2();
    return vec != nullptr ? vec : &scalar();
  }();
  return *table;
}

}  // namespace inband::kernels
