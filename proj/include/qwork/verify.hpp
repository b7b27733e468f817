#pragma once

// Ground truth for the classical engine. The oracle carries the full
// system (x) bath (x) weight Hilbert space with a truncated weight ladder;
// the samplers probe the second law and weight-start independence.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qwork/protocol.hpp"
#include "qwork/qcore.hpp"
#include "qwork/thermo.hpp"

namespace qwork::verify {

using thermo::ThermalContext;

/// An energy-conserving permutation on system (x) bath. Basis state j is sent
/// to perm[j] and the weight is raised by energies[j] - energies[perm[j]].
struct PermutationProtocol {
  std::vector<double> energies;
  std::vector<std::size_t> perm;

  /// Throws unless perm is a bijection on the basis.
  static PermutationProtocol make(std::vector<double> energies, std::vector<std::size_t> perm);
  std::size_t dim() const { return perm.size(); }
  double translation(std::size_t j) const { return energies[j] - energies[perm[j]]; }
};

PermutationProtocol identity_protocol(std::vector<double> energies);

/// |0_B, high> <-> |1_B, low> on system (x) one bath qubit (basis index s*2 + b).
PermutationProtocol swap_protocol(std::span<const double> system_energies, std::size_t level_low,
                                  std::size_t level_high, double bath_gap);

/// Weight ladder k * spacing for k in [-M, M].
struct TruncatedWeight {
  double spacing = 1.0;
  std::int64_t half_width = 0;

  static TruncatedWeight make(double spacing, std::int64_t half_width);
  std::size_t levels() const { return static_cast<std::size_t>(2 * half_width + 1); }
  double energy(std::size_t index) const {
    return static_cast<double>(static_cast<std::int64_t>(index) - half_width) * spacing;
  }
  std::size_t index_of(std::int64_t level) const { return static_cast<std::size_t>(level + half_width); }
};

struct BuiltUnitary {
  qcore::SparseMatrix u;
  /// Translation of each system(x)bath basis state in lattice units.
  std::vector<std::int64_t> units;
  /// Columns whose translation leaves the window (they wrap around cyclically).
  std::vector<std::size_t> boundary_columns;
};

/// U = sum_j |perm[j]><j| (x) Gamma_{units_j}, acting on (system (x) bath) (x) weight.
/// Translations must be multiples of the spacing. The window wraps cyclically,
/// so U is exactly unitary; wrapped columns are reported.
BuiltUnitary build_unitary(const PermutationProtocol& protocol, const TruncatedWeight& weight);

/// sum_j (E_j - E_perm[j]) rho_jj: independent of the weight state.
double work_formula(const PermutationProtocol& protocol, std::span<const double> diag_sb);
double work_formula(const PermutationProtocol& protocol, const qcore::DensityOperator& rho_sb);

struct OracleConfig {
  std::vector<double> system_energies;
  qcore::Matrix rho_s;
  /// One fresh thermal bath qubit per step. Gaps are snapped so translations
  /// land on the ladder; the bath qubit is thermal at its snapped gap.
  std::vector<protocol::SwapStep> schedule;
  TruncatedWeight weight;
  /// Weight starts in this level unless `weight_state` is given.
  std::int64_t initial_level = 0;
  std::optional<qcore::Matrix> weight_state;
  std::size_t cap = qcore::kDefaultDimensionCap;
};

struct OracleResult {
  double work = 0.0;
  std::vector<double> step_work;
  std::vector<double> bath_gaps;       // after snapping
  std::vector<double> bath_excitations;
  std::vector<double> epsilons;        // snapped minus requested translation
  std::vector<double> bath_excitations_after;
  qcore::Matrix system_state;
  std::vector<double> weight_populations;
  std::size_t dimension = 0;
};

/// Exact evolution of rho_S (x) tau_B1 (x) ... (x) tau_BN (x) rho_W. Throws
/// "weight window too small" if any populated state would wrap.
OracleResult oracle_run(const OracleConfig& config, const ThermalContext& ctx);

/// Half-width keeping the largest possible cumulative translation (plus the
/// initial level) below M * spacing / 2.
std::int64_t window_half_width(std::span<const double> system_energies, std::span<const protocol::SwapStep> schedule,
                               double spacing, std::int64_t initial_level, const ThermalContext& ctx);

/// Per-trial seeds: splitmix64(master + t).
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial);

/// Uniform permutation inside each block (every index in one block when
/// `blocks` is empty). With `two_cycles_only`, a random fixed-point-free
/// pairing inside each block.
PermutationProtocol random_protocol(std::vector<double> energies, const std::vector<std::vector<std::size_t>>& blocks,
                                    bool two_cycles_only, std::mt19937_64& rng);

struct SamplerOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  bool two_cycles_only = false;
  std::vector<std::vector<std::size_t>> blocks;
};

struct SamplerReport {
  double max_work = 0.0;
  std::size_t argmax_trial = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

/// Largest work drawn from thermal subsystems (one spectrum per subsystem)
/// over sampled permutations; never positive.
SamplerReport second_law_sampler(const std::vector<std::vector<double>>& spectra, const ThermalContext& ctx,
                                 const SamplerOptions& options);

struct IndependenceReport {
  std::vector<double> offsets;
  std::vector<double> works;
  double max_work_deviation = 0.0;
  double max_shape_deviation = 0.0;
  bool pass = false;
};

/// Runs the qubit protocol with the weight starting at each offset.
IndependenceReport engine_weight_independence(const protocol::QubitParams& params, protocol::LedgerOptions options,
                                              std::span<const double> offsets);
/// Runs the oracle with the initial weight level moved by each shift.
IndependenceReport oracle_weight_independence(const OracleConfig& base, const ThermalContext& ctx,
                                              std::span<const std::int64_t> level_shifts);

struct ExpansionRow {
  double dp = 0.0;
  double delta_f = 0.0;      // F(p) - F(p - dp), system only
  double delta_e = 0.0;      // weight energy of one step with r = p - dp
  double first_order = 0.0;  // dp (E_S - T S'(p))
  double quad_f = 0.0;       // (delta_f - first_order) / dp^2
  double quad_e = 0.0;
};

struct ExpansionCheck {
  std::vector<ExpansionRow> rows;
  double quad_f = 0.0;  // extrapolated to dp -> 0
  double quad_e = 0.0;
  double ratio = 0.0;   // quad_e / quad_f
  double quad_f_series = 0.0;  // T S''(p) / 2
  double quad_e_series = 0.0;  // T S''(p)
};

/// Exact single-step free-energy and work changes against their second-order
/// series. Needs at least two distinct dp values in (0, p).
ExpansionCheck expansion_check(double p, std::span<const double> dps, double system_gap, const ThermalContext& ctx);

struct VerificationReport {
  std::string test;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double max_violation = 0.0;
  bool pass = false;
};

}  // namespace qwork::verify
