#pragma once

// Data-parallel inner loops shared by the dual-number evaluator and the small
// matrix products. Each kernel has a scalar reference and an AVX2 variant; the
// variant is chosen once at startup from CPUID. Both variants perform the same
// IEEE operations in the same order (no FMA contraction), so results are
// bit-identical and reports do not depend on the host ISA.

#include <cstddef>

namespace geq::simd {

enum class Isa { Scalar, Avx2 };

/// out[i] = a * x[i] + b * y[i]
using AxpbyFn = void (*)(std::size_t n, double a, const double* x, double b, const double* y,
                         double* out);
/// out[i] = a * x[i]
using ScaleFn = void (*)(std::size_t n, double a, const double* x, double* out);
/// Row-major C(m x n) = A(m x k) * B(k x n); C must not alias A or B.
using GemmFn = void (*)(std::size_t m, std::size_t k, std::size_t n, const double* a,
                        const double* b, double* c);

struct Kernels {
  Isa isa;
  AxpbyFn axpby;
  ScaleFn scale;
  GemmFn gemm;
};

const Kernels& scalar_kernels();
/// Null when the binary was built without AVX2 support.
const Kernels* avx2_kernels();

/// Kernels selected for this process. GEQ_SIMD=scalar in the environment pins
/// the scalar reference.
const Kernels& active();

bool cpu_has_avx2();
const char* isa_name(Isa isa);

inline void axpby(std::size_t n, double a, const double* x, double b, const double* y,
                  double* out) {
  active().axpby(n, a, x, b, y, out);
}
inline void scale(std::size_t n, double a, const double* x, double* out) {
  active().scale(n, a, x, out);
}
inline void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                 double* c) {
  active().gemm(m, k, n, a, b, c);
}

}  // namespace geq::simd
