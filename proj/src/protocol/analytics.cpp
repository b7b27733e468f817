#include "qwork/error.hpp"
#include "qwork/protocol.hpp"

namespace qwork::protocol {

WeightLedger n_copy_convolution(const WeightLedger& single, int n, double merge_tol) {
  require(n >= 1, ErrorKind::InvalidParameters, "copy count must be positive");
  WeightLedger result;
  bool have = false;
  WeightLedger base = single;
  for (unsigned k = static_cast<unsigned>(n); k != 0; k >>= 1) {
    if (k & 1u) {
      result = have ? weight::convolve(result, base, merge_tol) : base;
      have = true;
    }
    if (k > 1) base = weight::convolve(base, base, merge_tol);
  }
  return result;
}

double optimality_gap(double protocol_work, const DiagonalState& rho, const DiagonalState& sigma,
                      const ThermalContext& ctx) {
  return free_energy(rho, ctx) - free_energy(sigma, ctx) - protocol_work;
}

}  // namespace qwork::protocol
