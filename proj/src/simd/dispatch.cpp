#include <cassert>
#include <cstdlib>
#include <string>

#include "qwork/simd/kernels.hpp"

namespace qwork::simd {
namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(QWORK_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(QWORK_HAVE_NEON)
      return true;  // mandatory on aarch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& select() {
  const char* env = std::getenv("QWORK_SIMD");
  if (env != nullptr) {
    const std::string want(env);
    for (Isa isa : available()) {
      if (isa_name(isa) == want) return *table(isa);
    }
    return detail::kScalarTable;
  }
  const auto isas = available();
  return *table(isas.back());
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

const KernelTable* table(Isa isa) {
  if (!cpu_supports(isa)) return nullptr;
  switch (isa) {
    case Isa::Scalar:
      return &detail::kScalarTable;
#if defined(QWORK_HAVE_AVX2)
    case Isa::Avx2:
      return &detail::kAvx2Table;
#endif
#if defined(QWORK_HAVE_NEON)
    case Isa::Neon:
      return &detail::kNeonTable;
#endif
    default:
      return nullptr;
  }
}

std::vector<Isa> available() {
  std::vector<Isa> out{Isa::Scalar};
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (table(isa) != nullptr) out.push_back(isa);
  }
  return out;
}

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

void scale_shift(std::span<const double> x, std::span<const double> m, double shift, double factor,
                 std::span<double> x_out, std::span<double> m_out) {
  assert(x.size() == m.size() && x_out.size() >= x.size() && m_out.size() >= m.size());
  active().scale_shift(x.data(), m.data(), x.size(), shift, factor, x_out.data(), m_out.data());
}

Moments moments(std::span<const double> x, std::span<const double> m) {
  assert(x.size() == m.size());
  return active().moments(x.data(), m.data(), x.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }

}  // namespace qwork::simd
