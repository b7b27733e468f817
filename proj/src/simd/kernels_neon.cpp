#include <arm_neon.h>

#include "qwork/simd/kernels.hpp"

namespace qwork::simd {
namespace {

void scale_shift_neon(const double* x, const double* m, std::size_t n, double shift, double factor,
                      double* x_out, double* m_out) {
  const float64x2_t vs = vdupq_n_f64(shift);
  const float64x2_t vf = vdupq_n_f64(factor);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    vst1q_f64(x_out + k, vaddq_f64(vld1q_f64(x + k), vs));
    vst1q_f64(m_out + k, vmulq_f64(vld1q_f64(m + k), vf));
  }
  for (; k < n; ++k) {
    x_out[k] = x[k] + shift;
    m_out[k] = m[k] * factor;
  }
}

Moments moments_neon(const double* x, const double* m, std::size_t n) {
  float64x2_t s0 = vdupq_n_f64(0.0);
  float64x2_t s1 = vdupq_n_f64(0.0);
  float64x2_t s2 = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t vx = vld1q_f64(x + k);
    const float64x2_t vm = vld1q_f64(m + k);
    const float64x2_t mx = vmulq_f64(vm, vx);
    s0 = vaddq_f64(s0, vm);
    s1 = vaddq_f64(s1, mx);
    s2 = vfmaq_f64(s2, mx, vx);
  }
  Moments out{vaddvq_f64(s0), vaddvq_f64(s1), vaddvq_f64(s2)};
  for (; k < n; ++k) {
    const double mx = m[k] * x[k];
    out.mass += m[k];
    out.first += mx;
    out.second += mx * x[k];
  }
  return out;
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) acc = vfmaq_f64(acc, vld1q_f64(a + k), vld1q_f64(b + k));
  double out = vaddvq_f64(acc);
  for (; k < n; ++k) out += a[k] * b[k];
  return out;
}

double sum_neon(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) acc = vaddq_f64(acc, vld1q_f64(a + k));
  double out = vaddvq_f64(acc);
  for (; k < n; ++k) out += a[k];
  return out;
}

}  // namespace

namespace detail {
const KernelTable kNeonTable{Isa::Neon, scale_shift_neon, moments_neon, dot_neon, sum_neon};
}

}  // namespace qwork::simd
