#include <cstdlib>
#include <string_view>

#include "resonant/simd.hpp"

namespace resonant::simd {

#ifdef RESONANT_HAVE_AVX2
namespace detail {
const KernelTable& avx2_table();
}
#endif

const KernelTable* avx2_kernels() {
#ifdef RESONANT_HAVE_AVX2
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  if (supported) return &detail::avx2_table();
#endif
  return nullptr;
}

namespace {

const KernelTable* initial_table() {
  if (const char* env = std::getenv("RESONANT_SIMD")) {
    if (std::string_view(env) == "scalar") return &scalar_kernels();
  }
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

const KernelTable*& current() {
  static const KernelTable* table = initial_table();
  return table;
}

}  // namespace

const KernelTable& active() { return *current(); }

bool select(std::string_view name) {
  if (name == "scalar") {
    current() = &scalar_kernels();
    return true;
  }
  if (name == "avx2") {
    if (const KernelTable* t = avx2_kernels()) {
      current() = t;
      return true;
    }
  }
  return false;
}

}  // namespace resonant::simd
