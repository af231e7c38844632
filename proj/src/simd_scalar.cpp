#include "geq/simd.hpp"

namespace geq::simd {
namespace {

void axpby_scalar(std::size_t n, double a, const double* x, double b, const double* y,
                  double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ax = a * x[i];
    const double by = b * y[i];
    out[i] = ax + by;
  }
}

void scale_scalar(std::size_t n, double a, const double* x, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i];
}

void gemm_scalar(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                 double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        const double prod = a[i * k + p] * b[p * n + j];
        acc = acc + prod;
      }
      c[i * n + j] = acc;
    }
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{Isa::Scalar, &axpby_scalar, &scale_scalar, &gemm_scalar};
  return k;
}

}  // namespace geq::simd
