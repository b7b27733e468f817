#pragma once

// States with coherence between energy levels. n copies are collectively
// dephased onto the total-energy eigenspaces of H^{(x)n}; what remains is a
// probability over blocks plus a (possibly coherent) state inside each block,
// and work is then drawn by expanding the block states at fixed energy.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qwork/qcore.hpp"
#include "qwork/thermo.hpp"

namespace qwork::coherence {

using qcore::DensityOperator;
using qcore::HermitianOperator;
using thermo::ThermalContext;

/// Relative tolerance used to decide that two total energies coincide.
inline constexpr double kEnergyGroupTol = 1e-9;
/// Largest sum of squared block ranks kept in memory.
inline constexpr std::size_t kBlockStorageCap = std::size_t{1} << 22;

struct CoherentInput {
  DensityOperator rho;
  HermitianOperator h;
  int n_copies = 1;

  /// Throws on mismatched dimensions, n < 1, or d^n above the dimension cap.
  static CoherentInput make(DensityOperator rho, HermitianOperator h, int n_copies,
                            std::size_t cap = qcore::kDefaultDimensionCap);
};

struct Block {
  double energy = 0.0;
  std::size_t rank = 0;
  double probability = 0.0;
  /// Normalized state inside the eigenspace, in the product energy basis of
  /// `members`. Maximally mixed when probability is 0.
  DensityOperator state = DensityOperator::maximally_mixed(1);
  /// Product-basis strings (base-d digits, first copy most significant).
  std::vector<std::size_t> members;
};

struct BlockDecomposition {
  std::vector<Block> blocks;
  std::size_t single_dim = 0;
  int copies = 0;

  /// S(rho') = H(q) + sum_k q_k S(block_k).
  double entropy() const;
  std::vector<double> probabilities() const;
};

/// Energy eigenbasis of H (columns) and its eigenvalues, ascending.
struct EnergyBasis {
  Eigen::VectorXd energies;
  qcore::Matrix vectors;
};
EnergyBasis energy_basis(const HermitianOperator& h);

/// Single-copy dephasing: drops coherences between different energies.
DensityOperator dephase(const DensityOperator& rho, const HermitianOperator& h);

BlockDecomposition collective_dephase(const CoherentInput& input);

struct DephasingEntropy {
  double delta_s = 0.0;  // S(rho') - n S(rho)
  double bound = 0.0;    // (d-1) ln(n+1)
};
DephasingEntropy dephasing_entropy_increase(const CoherentInput& input);

/// Explicit check of the entropy bound with the coherent dephasing unitary
/// V = sum_k Pi_k (x) |z+k mod K><z| acting on an ancilla started in |0>.
struct AncillaCertificate {
  double joint_entropy = 0.0;     // S(rho_SA') = n S(rho)
  double system_entropy = 0.0;    // S(rho')
  double ancilla_entropy = 0.0;   // S(rho_A') = H(q)
  double n_single_entropy = 0.0;  // n S(rho)
  std::size_t ancilla_levels = 0; // K
  double log_multisets = 0.0;     // ln C(n+d-1, n)
  double bound = 0.0;             // (d-1) ln(n+1)
  bool holds = false;
};
/// Dense; throws DimensionCap when d^n * K exceeds `max_dim`.
AncillaCertificate verify_dephasing_with_ancilla(const CoherentInput& input, std::size_t max_dim = 512);

/// T sum_k q_k (S(target_k) - S(block_k)); throws "incompatible decomposition"
/// unless both sides share block energies, ranks and probabilities.
double block_expansion_work(const BlockDecomposition& blocks, const BlockDecomposition& target,
                            const ThermalContext& ctx);

struct SimulatedExpansion {
  double work = 0.0;
  std::vector<double> block_work;
};

/// Runs every block expansion through the diagonal engine: a free rotation
/// inside the (degenerate) block maps both states to their eigenbases, then
/// a state-to-state protocol on equal-energy levels takes the spectrum of
/// the block to that of the target. Targets need full rank.
SimulatedExpansion simulate_block_expansion(const BlockDecomposition& blocks, const BlockDecomposition& target,
                                            const ThermalContext& ctx, std::int64_t steps_per_segment);

struct PerCopyWork {
  double work_per_copy = 0.0;     // (expansion + n (F(omega) - F(tau))) / n
  double lower_bound = 0.0;       // F(rho) - F(tau) - T (d-1) ln(n+1) / n
  double expansion_work = 0.0;    // total over n copies
  double diagonal_stage_work = 0.0;  // per copy, F(omega) - F(tau)
  double delta_s = 0.0;
  double free_energy_target = 0.0;   // F(rho) - F(tau)
};

/// Dephase, expand every block to omega^{(x)n}, then run the diagonal stage
/// on each copy; all stages evaluated analytically.
PerCopyWork per_copy_work(const CoherentInput& input, const ThermalContext& ctx);

/// F(omega) - F(tau): the best a single copy can do.
double single_copy_optimum(const DensityOperator& rho, const HermitianOperator& h, const ThermalContext& ctx);

}  // namespace qwork::coherence
