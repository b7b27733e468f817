// Compiled with -mavx2 -mfma. Nothing here may run before dispatch.cpp has
// confirmed CPU support.

#include <immintrin.h>

#include "qwork/simd/kernels.hpp"

namespace qwork::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void scale_shift_avx2(const double* x, const double* m, std::size_t n, double shift, double factor,
                      double* x_out, double* m_out) {
  const __m256d vs = _mm256_set1_pd(shift);
  const __m256d vf = _mm256_set1_pd(factor);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(x_out + k, _mm256_add_pd(_mm256_loadu_pd(x + k), vs));
    _mm256_storeu_pd(m_out + k, _mm256_mul_pd(_mm256_loadu_pd(m + k), vf));
  }
  for (; k < n; ++k) {
    x_out[k] = x[k] + shift;
    m_out[k] = m[k] * factor;
  }
}

Moments moments_avx2(const double* x, const double* m, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d vx = _mm256_loadu_pd(x + k);
    const __m256d vm = _mm256_loadu_pd(m + k);
    const __m256d mx = _mm256_mul_pd(vm, vx);
    s0 = _mm256_add_pd(s0, vm);
    s1 = _mm256_add_pd(s1, mx);
    s2 = _mm256_fmadd_pd(mx, vx, s2);
  }
  Moments out{hsum(s0), hsum(s1), hsum(s2)};
  for (; k < n; ++k) {
    const double mx = m[k] * x[k];
    out.mass += m[k];
    out.first += mx;
    out.second += mx * x[k];
  }
  return out;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
  }
  for (; k + 4 <= n; k += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + k));
  double out = hsum(acc);
  for (; k < n; ++k) out += a[k];
  return out;
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{Isa::Avx2, scale_shift_avx2, moments_avx2, dot_avx2, sum_avx2};
}

}  // namespace qwork::simd
