#include <cmath>

#include "qwork/error.hpp"
#include "qwork/protocol.hpp"

namespace qwork::protocol {

std::vector<double> qubit_excitations(double p, double p_eq, std::int64_t steps) {
  require(steps >= 1, ErrorKind::InvalidParameters, "empty schedule");
  require(p >= 0.0 && p <= 1.0 && p_eq >= 0.0 && p_eq <= 1.0, ErrorKind::InvalidParameters,
          "populations must lie in [0,1]");
  std::vector<double> r(static_cast<std::size_t>(steps));
  const double n = static_cast<double>(steps);
  for (std::int64_t k = 1; k <= steps; ++k) {
    r[static_cast<std::size_t>(k - 1)] = p + (static_cast<double>(k) / n) * (p_eq - p);
  }
  return r;
}

std::vector<SwapStep> qubit_schedule(double p, double p_eq, std::int64_t steps, const ThermalContext& ctx) {
  std::vector<SwapStep> out;
  for (double r : qubit_excitations(p, p_eq, steps)) out.push_back(make_swap_step(0, 1, r, ctx));
  return out;
}

ProtocolTrace run_qubit_protocol(const QubitParams& params, const LedgerOptions& options) {
  require(std::isfinite(params.system_gap), ErrorKind::InvalidParameters, "non-finite system gap");
  const ThermalContext ctx(params.temperature);
  require(params.p >= 0.0 && params.p <= 1.0, ErrorKind::InvalidParameters, "p must lie in [0,1]");
  const double p_eq = thermo::excitation_from_gap(params.system_gap, ctx);
  const DiagonalState s = DiagonalState::make({1.0 - params.p, params.p}, {0.0, params.system_gap});
  const std::vector<SwapStep> schedule = qubit_schedule(params.p, p_eq, params.steps, ctx);
  return run_schedule(s, schedule, ctx, options);
}

ProtocolTrace run_isothermal_expansion(double temperature, std::int64_t steps, const LedgerOptions& options) {
  return run_qubit_protocol({0.0, 0.0, temperature, steps}, options);
}

WeightLedger asymptotic_weight_distribution(double p, double p_eq, double temperature) {
  const ThermalContext ctx(temperature);
  require(p >= 0.0 && p <= 1.0, ErrorKind::InvalidParameters, "p must lie in [0,1]");
  require(p_eq > 0.0 && p_eq < 1.0, ErrorKind::InvalidParameters, "p_eq must lie in (0,1)");
  std::vector<weight::Point> pts;
  if (p < 1.0) pts.push_back({ctx.temperature() * (std::log1p(-p) - std::log1p(-p_eq)), 1.0 - p});
  if (p > 0.0) pts.push_back({ctx.temperature() * std::log(p / p_eq), p});
  return WeightLedger::from_points(pts, weight::Grid::continuous(), 1e-15);
}

namespace {

void check_open(double p, double p_eq, std::int64_t steps) {
  require(p > 0.0 && p < 1.0 && p_eq > 0.0 && p_eq < 1.0, ErrorKind::InvalidParameters, "domain error");
  require(steps >= 1, ErrorKind::InvalidParameters, "empty schedule");
}

}  // namespace

// First-order expansion of the conditional work in 1/N. Derived by
// expanding the exact per-step Markov recursion around the straight path.
ConditionalMeans finite_n_mean_corrections(double p, double p_eq, double temperature, std::int64_t steps) {
  check_open(p, p_eq, steps);
  const ThermalContext ctx(temperature);
  const double t = ctx.temperature();
  const double n = static_cast<double>(steps);
  const double half_ds = 0.5 * (thermo::binary_entropy_prime(p_eq) - thermo::binary_entropy_prime(p));
  return {
      t * (std::log1p(-p) - std::log1p(-p_eq)) + t * (p_eq - p) * (half_ds - 1.0 / (1.0 - p)) / n,
      t * std::log(p / p_eq) + t * (p_eq - p) * (half_ds + 1.0 / p) / n,
  };
}

double finite_n_variance(double p, double p_eq, double temperature, std::int64_t steps) {
  check_open(p, p_eq, steps);
  const ThermalContext ctx(temperature);
  const double t = ctx.temperature();
  return t * t * (p - p_eq) * (thermo::binary_entropy_prime(p_eq) - thermo::binary_entropy_prime(p)) /
         static_cast<double>(steps);
}

}  // namespace qwork::protocol
