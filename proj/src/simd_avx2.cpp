#include "geq/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define GEQ_HAVE_AVX2 1
#include <immintrin.h>
#endif

namespace geq::simd {

#if defined(GEQ_HAVE_AVX2)
namespace {

__attribute__((target("avx2"))) void axpby_avx2(std::size_t n, double a, const double* x,
                                                double b, const double* y, double* out) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(ax, by));
  }
  for (; i < n; ++i) {
    const double ax = a * x[i];
    const double by = b * y[i];
    out[i] = ax + by;
  }
}

__attribute__((target("avx2"))) void scale_avx2(std::size_t n, double a, const double* x,
                                                double* out) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}

// Vectorised over columns of B; the k-loop order matches the scalar kernel.
__attribute__((target("avx2"))) void gemm_avx2(std::size_t m, std::size_t k, std::size_t n,
                                               const double* a, const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d prod =
            _mm256_mul_pd(_mm256_set1_pd(a[i * k + p]), _mm256_loadu_pd(b + p * n + j));
        acc = _mm256_add_pd(acc, prod);
      }
      _mm256_storeu_pd(c + i * n + j, acc);
    }
    for (; j < n; ++j) {
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

const Kernels* avx2_kernels() {
  static const Kernels k{Isa::Avx2, &axpby_avx2, &scale_avx2, &gemm_avx2};
  return &k;
}

bool cpu_has_avx2() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
}

#else

const Kernels* avx2_kernels() { return nullptr; }
bool cpu_has_avx2() { return false; }

#endif

}  // namespace geq::simd
