#pragma once

// Thermal states and the free-energy calculus. k_B = 1, temperatures are in
// energy units, entropies in nats.

#include <span>
#include <vector>

#include "qwork/qcore.hpp"

namespace qwork::thermo {

class ThermalContext {
 public:
  /// Throws InvalidParameters unless 0 < T < inf.
  explicit ThermalContext(double temperature);
  static ThermalContext from_beta(double beta);

  double temperature() const { return temperature_; }
  double beta() const { return beta_; }

 private:
  double temperature_;
  double beta_;
};

/// A thermal qubit: gap E with excited population r, E = T ln((1-r)/r).
struct QubitGap {
  double gap = 0.0;
  double excitation = 0.5;
};

QubitGap qubit_from_excitation(double r, const ThermalContext& ctx);
QubitGap qubit_from_gap(double gap, const ThermalContext& ctx);

/// e^{-beta H} / tr e^{-beta H}.
qcore::DensityOperator gibbs_state(const qcore::HermitianOperator& h, const ThermalContext& ctx);
std::vector<double> gibbs_probabilities(std::span<const double> energies, const ThermalContext& ctx);

/// F = <E> - T S.
double free_energy(const qcore::DensityOperator& rho, const qcore::HermitianOperator& h, const ThermalContext& ctx);
double free_energy(std::span<const double> probs, std::span<const double> energies, const ThermalContext& ctx);

/// Classical relative entropy sum p ln(p/q) in nats; +inf when supp p is not in supp q.
double relative_entropy(std::span<const double> p, std::span<const double> q);

double binary_entropy(double q);
/// ln((1-q)/q); q must lie in (0,1).
double binary_entropy_prime(double q);
/// -1/(1-q) - 1/q; q must lie in (0,1).
double binary_entropy_double_prime(double q);

/// D(p||q) for two-outcome distributions. Throws "divergent" when q is 0 or 1
/// and p differs from it.
double relative_binary_entropy(double p, double q);

double gap_from_excitation(double r, const ThermalContext& ctx);
double excitation_from_gap(double gap, const ThermalContext& ctx);

/// Inverse virtual temperature of the exchange between two qubit transitions.
/// Signed; throws "degenerate transition" when e1 == e2.
double virtual_beta(double e1, double beta1, double e2, double beta2);

/// Fannes-type continuity bound D ln(d2 / D); 0 when D == 0.
double fannes_entropy_bound(double trace_distance, double d2);
/// sqrt(a / L) bound on the trace distance after translating a flat packet.
double wavepacket_distance_bound(double max_gap, double half_width);

}  // namespace qwork::thermo
