#include "qwork/simd/kernels.hpp"

namespace qwork::simd {
namespace {

void scale_shift_scalar(const double* x, const double* m, std::size_t n, double shift, double factor,
                        double* x_out, double* m_out) {
  for (std::size_t k = 0; k < n; ++k) {
    x_out[k] = x[k] + shift;
    m_out[k] = m[k] * factor;
  }
}

Moments moments_scalar(const double* x, const double* m, std::size_t n) {
  Moments out;
  for (std::size_t k = 0; k < n; ++k) {
    const double mx = m[k] * x[k];
    out.mass += m[k];
    out.first += mx;
    out.second += mx * x[k];
  }
  return out;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += a[k];
  return acc;
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{Isa::Scalar, scale_shift_scalar, moments_scalar, dot_scalar, sum_scalar};
}

}  // namespace qwork::simd
