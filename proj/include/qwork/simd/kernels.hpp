#pragma once

// Data-parallel kernels behind the weight ledger and the oracle's diagonal
// expectations. Every kernel has a scalar reference implementation; wider
// variants (AVX2+FMA on x86-64, NEON on aarch64) are picked once at runtime.
// Set QWORK_SIMD=scalar in the environment to force the reference path.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace qwork::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

/// Zeroth, first and second weighted moments of a point set.
struct Moments {
  double mass = 0.0;    // sum m
  double first = 0.0;   // sum m x
  double second = 0.0;  // sum m x^2
};

struct KernelTable {
  Isa isa;
  // x_out[k] = x[k] + shift, m_out[k] = m[k] * factor. Output may alias input.
  void (*scale_shift)(const double* x, const double* m, std::size_t n, double shift, double factor,
                      double* x_out, double* m_out);
  Moments (*moments)(const double* x, const double* m, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
};

/// Kernel table for `isa`, or nullptr when this build or CPU cannot run it.
const KernelTable* table(Isa isa);

/// Variants runnable here, scalar first.
std::vector<Isa> available();

/// The table used by the library. Chosen on first call.
const KernelTable& active();

void scale_shift(std::span<const double> x, std::span<const double> m, double shift, double factor,
                 std::span<double> x_out, std::span<double> m_out);
Moments moments(std::span<const double> x, std::span<const double> m);
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);

namespace detail {
extern const KernelTable kScalarTable;
#if defined(QWORK_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(QWORK_HAVE_NEON)
extern const KernelTable kNeonTable;
#endif
}  // namespace detail

}  // namespace qwork::simd
