#include "flownet/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace flownet::kernels {

const KernelTable* avx2_table() {
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2")) return detail::avx2_table_impl();
#endif
  return nullptr;
}

const KernelTable& active_table() {
  static const KernelTable* chosen = [] {
    const KernelTable* simd = avx2_table();
    if (const char* want = std::getenv("FLOWNET_KERNELS")) {
      if (std::strcmp(want, "scalar") == 0) return &scalar_table();
      if (std::strcmp(want, "avx2") == 0 && simd) return simd;
    }
    return simd ? simd : &scalar_table();
  }();
  return *chosen;
}

}  // namespace flownet::kernels
