#include <cstdlib>
#include <cstring>

#include "homlab/kernels.hpp"

namespace homlab::kernels {

#if HOMLAB_HAVE_AVX2_TU
const Table& avx2_table_impl();
#endif

std::string to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const Table* avx2_table() {
#if HOMLAB_HAVE_AVX2_TU
  return &avx2_table_impl();
#else
  return nullptr;
#endif
}

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Isa choose() {
  const char* force = std::getenv("HOMLAB_FORCE_SCALAR");
  if (force && std::strcmp(force, "0") != 0 && *force) return Isa::Scalar;
  return avx2_table() && cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

}  // namespace

Isa active_isa() {
  static const Isa isa = choose();
  return isa;
}

const Table& active() { return active_isa() == Isa::Avx2 ? *avx2_table() : scalar_table(); }

}  // namespace homlab::kernels
