#pragma once

// Work extraction from states diagonal in the energy basis. The engine keeps
// the joint (initial level, current level, weight offset) distribution as
// weighted point sets; every swap step is a permutation of system/bath levels
// plus a weight translation, so no Hilbert space is needed here.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qwork/thermo.hpp"
#include "qwork/weight.hpp"

namespace qwork::protocol {

using thermo::ThermalContext;
using weight::PointSet;
using weight::WeightLedger;

/// Probability vector over energy levels.
struct DiagonalState {
  std::vector<double> probs;
  std::vector<double> energies;

  /// Throws InvalidParameters on negative entries, sum != 1 (1e-12) or size mismatch.
  static DiagonalState make(std::vector<double> probs, std::vector<double> energies);
  std::size_t dim() const { return probs.size(); }
};

DiagonalState thermal_state(std::vector<double> energies, const ThermalContext& ctx);
double free_energy(const DiagonalState& s, const ThermalContext& ctx);

/// One bath qubit exchanged against the system pair (level_low, level_high):
/// |0_B, high> <-> |1_B, low> with the weight translated by
/// (E_high - E_low) - bath_gap on the high -> low branch.
struct SwapStep {
  std::size_t level_low = 0;
  std::size_t level_high = 1;
  double bath_excitation = 0.5;
  double bath_gap = 0.0;
};

/// Clamp applied to excitations before converting them to gaps.
inline constexpr double kExcitationClamp = 1e-12;

SwapStep make_swap_step(std::size_t level_low, std::size_t level_high, double bath_excitation, const ThermalContext& ctx);

struct LedgerOptions {
  /// Absolute merge tolerance; negative selects the default 1e-9 * T.
  double merge_tol = -1.0;
  /// Points lighter than this are folded into a neighbour (mass and mean kept).
  double mass_floor = weight::kDefaultMassFloor;
  /// Per-group point budget. A group that outgrows it is re-coalesced at
  /// tolerance span / max_points. Means are unaffected.
  std::size_t max_points = std::size_t{1} << 12;
  /// Lattice mode snaps every translation onto the grid by adjusting the bath gap.
  weight::Grid grid = weight::Grid::continuous();
  /// Weight state before the protocol; the weight is uncorrelated with the system.
  WeightLedger initial_ledger = WeightLedger();
  /// Keep per-step system probabilities in the trace.
  bool record_probs = true;

  double resolved_merge_tol(const ThermalContext& ctx) const;
};

/// Joint distribution of (initial level, current level, weight displacement).
class JointClassicalState {
 public:
  struct Entry {
    std::size_t initial_level;
    std::size_t current_level;
    double offset;
    double mass;
  };

  /// Every level starts as a point at displacement 0 carrying its probability.
  static JointClassicalState initial(std::span<const double> probs);

  std::size_t levels() const { return levels_; }
  const PointSet& group(std::size_t initial_level, std::size_t current_level) const {
    return groups_[initial_level * levels_ + current_level];
  }

  std::vector<Entry> entries() const;
  /// Distribution over current levels.
  std::vector<double> marginal() const;
  double total_mass() const;
  double mean_offset() const;

 private:
  friend double apply_swap_step_in_place(JointClassicalState&, const SwapStep&, std::span<const double>,
                                         double, const LedgerOptions&);

  std::size_t levels_ = 0;
  std::vector<PointSet> groups_;
};

/// Applies one swap step in place and returns the mean weight gain computed
/// from the current marginals, (P_high (1-r) - P_low r) * ((E_high - E_low) - E_B).
double apply_swap_step_in_place(JointClassicalState& state, const SwapStep& step, std::span<const double> energies,
                                double merge_tol, const LedgerOptions& options);

std::pair<JointClassicalState, double> apply_swap_step(const JointClassicalState& state, const SwapStep& step,
                                                       std::span<const double> energies, double merge_tol,
                                                       const LedgerOptions& options = {});

struct StepRecord {
  std::int64_t k = 0;
  std::size_t level_low = 0;
  std::size_t level_high = 1;
  double r = 0.0;
  double bath_gap = 0.0;
  double work_increment = 0.0;
  double cumulative_work = 0.0;
  /// Drop in system free energy across the step.
  double free_energy_drop = 0.0;
  /// Excited population of the bath qubit after the step.
  double bath_excitation_after = 0.0;
  std::vector<double> system_probs;
};

struct ConditionalLedger {
  std::size_t initial_level = 0;
  double probability = 0.0;
  /// Normalized weight distribution given the initial level; empty when probability is 0.
  std::optional<WeightLedger> ledger;
};

struct ProtocolTrace {
  std::vector<double> energies;
  std::vector<double> initial_probs;
  std::vector<double> final_probs;
  std::vector<StepRecord> steps;
  WeightLedger initial_ledger;
  WeightLedger final_ledger;
  std::vector<ConditionalLedger> conditional;
  double merge_tol = 0.0;

  double work() const { return steps.empty() ? 0.0 : steps.back().cumulative_work; }
};

/// Runs an arbitrary schedule from a diagonal state. Throws Validation when
/// the final ledger mean drifts from the accumulated work by more than 1e-10.
ProtocolTrace run_schedule(const DiagonalState& initial, std::span<const SwapStep> schedule, const ThermalContext& ctx,
                           const LedgerOptions& options = {});

/// r_k = p + (k/N)(p_eq - p) for k = 1..N. Throws "empty schedule" for N = 0.
std::vector<double> qubit_excitations(double p, double p_eq, std::int64_t steps);
std::vector<SwapStep> qubit_schedule(double p, double p_eq, std::int64_t steps, const ThermalContext& ctx);

struct QubitParams {
  double p = 0.0;           // initial excited population
  double system_gap = 0.0;  // E_S
  double temperature = 1.0;
  std::int64_t steps = 1;
};

ProtocolTrace run_qubit_protocol(const QubitParams& params, const LedgerOptions& options = {});

/// p = 0 on a degenerate qubit: the discrete analogue of isothermal expansion.
ProtocolTrace run_isothermal_expansion(double temperature, std::int64_t steps, const LedgerOptions& options = {});

/// Two peaks at T ln((1-p)/(1-p_eq)) (mass 1-p) and T ln(p/p_eq) (mass p).
WeightLedger asymptotic_weight_distribution(double p, double p_eq, double temperature);

struct ConditionalMeans {
  double ground = 0.0;   // start in level 0
  double excited = 0.0;  // start in level 1
};

/// Conditional weight means to first order in 1/N.
ConditionalMeans finite_n_mean_corrections(double p, double p_eq, double temperature, std::int64_t steps);
/// Conditional variance (equal for both peaks) to first order in 1/N.
double finite_n_variance(double p, double p_eq, double temperature, std::int64_t steps);

struct PairStepResult {
  DiagonalState state;
  double work = 0.0;
  SwapStep step;
};

/// One qudit step moving probability between levels i and j so that the pair
/// reaches `target` (only entries i and j may differ from the current state).
PairStepResult run_qudit_pair_step(const DiagonalState& state, std::size_t i, std::size_t j,
                                   std::span<const double> target, const ThermalContext& ctx);

/// Waypoints from rho to sigma, consecutive ones differing on one level pair.
/// Excess probability first flows into `pivot`, then out of it.
std::vector<std::vector<double>> two_phase_path(std::span<const double> rho, std::span<const double> sigma,
                                                std::size_t pivot = 0);

/// Schedule following a waypoint path with `steps` swaps spread evenly over
/// its segments (remainder to the last one).
std::vector<SwapStep> path_schedule(const std::vector<std::vector<double>>& path, std::int64_t steps,
                                    const ThermalContext& ctx);

ProtocolTrace run_state_to_state(const DiagonalState& rho, const DiagonalState& sigma, const ThermalContext& ctx,
                                 std::int64_t steps, std::optional<std::vector<std::vector<double>>> path = std::nullopt,
                                 const LedgerOptions& options = {});

/// n-fold self-convolution: the weight after running n independent copies.
WeightLedger n_copy_convolution(const WeightLedger& single, int n, double merge_tol = 0.0);

/// F(rho) - F(sigma) - work; nonnegative for every admissible protocol.
double optimality_gap(double protocol_work, const DiagonalState& rho, const DiagonalState& sigma,
                      const ThermalContext& ctx);

}  // namespace qwork::protocol
