#include <cstdlib>
#include <cstring>

#include "geq/simd.hpp"

namespace geq::simd {
namespace {

const Kernels& select() {
  const char* pin = std::getenv("GEQ_SIMD");
  if (pin != nullptr && std::strcmp(pin, "scalar") == 0) return scalar_kernels();
  if (const Kernels* k = avx2_kernels(); k != nullptr && cpu_has_avx2()) return *k;
  return scalar_kernels();
}

}  // namespace

const Kernels& active() {
  static const Kernels& chosen = select();
  return chosen;
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace geq::simd
