#include <algorithm>
#include <cmath>

#include "qwork/error.hpp"
#include "qwork/protocol.hpp"
#include "qwork/simd/kernels.hpp"

namespace qwork::protocol {
namespace {

struct Scratch {
  PointSet stay;
  PointSet moved;
  PointSet low;
  PointSet high;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

void scaled_copy(const PointSet& in, double shift, double factor, PointSet& out) {
  out.offsets.resize(in.size());
  out.masses.resize(in.size());
  simd::scale_shift(in.offsets, in.masses, shift, factor, out.offsets, out.masses);
}

// Folds away light points and re-coalesces groups that outgrew the budget.
void tidy(PointSet& set, double merge_tol, const LedgerOptions& options) {
  weight::fold_light(set, options.mass_floor, options.grid);
  if (options.max_points > 0 && set.size() > options.max_points && options.grid.mode == weight::Mode::Continuous) {
    const double span = set.offsets.back() - set.offsets.front();
    weight::coalesce(set, std::max(merge_tol, span / static_cast<double>(options.max_points)), options.grid);
  }
}

double checked_translation(const SwapStep& step, std::span<const double> energies, const LedgerOptions& options) {
  const double delta = (energies[step.level_high] - energies[step.level_low]) - step.bath_gap;
  if (options.grid.mode == weight::Mode::Lattice) {
    const double units = delta / options.grid.spacing;
    require(std::abs(units - std::nearbyint(units)) <= 1e-9 * std::max(1.0, std::abs(units)),
            ErrorKind::InvalidParameters, "off-lattice shift");
  }
  return delta;
}

}  // namespace

DiagonalState DiagonalState::make(std::vector<double> probs, std::vector<double> energies) {
  require(!probs.empty(), ErrorKind::InvalidParameters, "empty state");
  require(probs.size() == energies.size(), ErrorKind::DimensionMismatch, "dimension mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    require(std::isfinite(probs[k]) && probs[k] >= 0.0, ErrorKind::InvalidParameters, "negative probability");
    require(std::isfinite(energies[k]), ErrorKind::InvalidParameters, "non-finite energy");
    total += probs[k];
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorKind::InvalidParameters, "probabilities do not sum to 1");
  return {std::move(probs), std::move(energies)};
}

DiagonalState thermal_state(std::vector<double> energies, const ThermalContext& ctx) {
  std::vector<double> probs = thermo::gibbs_probabilities(energies, ctx);
  return DiagonalState::make(std::move(probs), std::move(energies));
}

double free_energy(const DiagonalState& s, const ThermalContext& ctx) {
  return thermo::free_energy(s.probs, s.energies, ctx);
}

SwapStep make_swap_step(std::size_t level_low, std::size_t level_high, double bath_excitation,
                        const ThermalContext& ctx) {
  require(level_low != level_high, ErrorKind::InvalidParameters, "swap needs two distinct levels");
  require(std::isfinite(bath_excitation) && bath_excitation >= 0.0 && bath_excitation <= 1.0,
          ErrorKind::InvalidParameters, "bath excitation outside [0,1]");
  const double r = std::clamp(bath_excitation, kExcitationClamp, 1.0 - kExcitationClamp);
  return {level_low, level_high, r, thermo::gap_from_excitation(r, ctx)};
}

double LedgerOptions::resolved_merge_tol(const ThermalContext& ctx) const {
  if (merge_tol < 0.0) return weight::kDefaultMergeTolPerT * ctx.temperature();
  return merge_tol;
}

JointClassicalState JointClassicalState::initial(std::span<const double> probs) {
  require(!probs.empty(), ErrorKind::InvalidParameters, "empty state");
  JointClassicalState s;
  s.levels_ = probs.size();
  s.groups_.resize(s.levels_ * s.levels_);
  for (std::size_t a = 0; a < s.levels_; ++a) {
    if (probs[a] > 0.0) s.groups_[a * s.levels_ + a].push(0.0, probs[a]);
  }
  return s;
}

std::vector<JointClassicalState::Entry> JointClassicalState::entries() const {
  std::vector<Entry> out;
  for (std::size_t a = 0; a < levels_; ++a) {
    for (std::size_t c = 0; c < levels_; ++c) {
      const PointSet& g = group(a, c);
      for (std::size_t k = 0; k < g.size(); ++k) out.push_back({a, c, g.offsets[k], g.masses[k]});
    }
  }
  return out;
}

std::vector<double> JointClassicalState::marginal() const {
  std::vector<double> p(levels_, 0.0);
  for (std::size_t a = 0; a < levels_; ++a) {
    for (std::size_t c = 0; c < levels_; ++c) p[c] += simd::sum(group(a, c).masses);
  }
  return p;
}

double JointClassicalState::total_mass() const {
  double m = 0.0;
  for (const PointSet& g : groups_) m += simd::sum(g.masses);
  return m;
}

double JointClassicalState::mean_offset() const {
  double m = 0.0;
  for (const PointSet& g : groups_) m += simd::dot(g.offsets, g.masses);
  return m;
}

double apply_swap_step_in_place(JointClassicalState& state, const SwapStep& step, std::span<const double> energies,
                                double merge_tol, const LedgerOptions& options) {
  const std::size_t d = state.levels_;
  require(energies.size() == d, ErrorKind::DimensionMismatch, "dimension mismatch");
  require(step.level_low < d && step.level_high < d && step.level_low != step.level_high,
          ErrorKind::InvalidParameters, "swap levels out of range");
  const double r = step.bath_excitation;
  require(r >= 0.0 && r <= 1.0, ErrorKind::InvalidParameters, "bath excitation outside [0,1]");
  const double delta = checked_translation(step, energies, options);

  Scratch& w = scratch();
  double p_low = 0.0;
  double p_high = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    PointSet& g_low = state.groups_[a * d + step.level_low];
    PointSet& g_high = state.groups_[a * d + step.level_high];
    if (g_low.empty() && g_high.empty()) continue;
    p_low += simd::sum(g_low.masses);
    p_high += simd::sum(g_high.masses);

    // high -> low gains delta; low -> high pays it back.
    scaled_copy(g_low, 0.0, 1.0 - r, w.stay);
    scaled_copy(g_high, delta, 1.0 - r, w.moved);
    weight::merge_sorted(w.stay, w.moved, merge_tol, options.grid, w.low);
    scaled_copy(g_high, 0.0, r, w.stay);
    scaled_copy(g_low, -delta, r, w.moved);
    weight::merge_sorted(w.stay, w.moved, merge_tol, options.grid, w.high);

    tidy(w.low, merge_tol, options);
    tidy(w.high, merge_tol, options);
    std::swap(g_low, w.low);
    std::swap(g_high, w.high);
  }
  return (p_high * (1.0 - r) - p_low * r) * delta;
}

std::pair<JointClassicalState, double> apply_swap_step(const JointClassicalState& state, const SwapStep& step,
                                                       std::span<const double> energies, double merge_tol,
                                                       const LedgerOptions& options) {
  JointClassicalState next = state;
  const double work = apply_swap_step_in_place(next, step, energies, merge_tol, options);
  return {std::move(next), work};
}

namespace {

PointSet gather(const JointClassicalState& s, std::size_t a_begin, std::size_t a_end) {
  PointSet all;
  for (std::size_t a = a_begin; a < a_end; ++a) {
    for (std::size_t c = 0; c < s.levels(); ++c) {
      const PointSet& g = s.group(a, c);
      all.offsets.insert(all.offsets.end(), g.offsets.begin(), g.offsets.end());
      all.masses.insert(all.masses.end(), g.masses.begin(), g.masses.end());
    }
  }
  weight::sort_points(all);
  return all;
}

// Places a displacement distribution on top of the initial weight.
WeightLedger with_initial(const WeightLedger& displacement, const WeightLedger& initial) {
  if (initial.size() == 1 && initial.truncated_mass() == 0.0) return weight::shift(displacement, initial.offsets()[0]);
  return weight::convolve(displacement, initial, displacement.merge_tol());
}

}  // namespace

ProtocolTrace run_schedule(const DiagonalState& initial, std::span<const SwapStep> schedule, const ThermalContext& ctx,
                           const LedgerOptions& options) {
  const std::size_t d = initial.dim();
  const DiagonalState checked = DiagonalState::make(initial.probs, initial.energies);
  require(options.mass_floor >= 0.0, ErrorKind::InvalidParameters, "mass floor must be nonnegative");
  const double merge_tol = options.resolved_merge_tol(ctx);
  require(merge_tol >= 0.0, ErrorKind::InvalidParameters, "merge tolerance must be nonnegative");
  if (options.grid.mode == weight::Mode::Lattice) {
    require(options.initial_ledger.size() == 1 || options.initial_ledger.mode() == weight::Mode::Lattice,
            ErrorKind::InvalidParameters, "initial ledger is not on the lattice");
  }

  ProtocolTrace trace;
  trace.energies = checked.energies;
  trace.initial_probs = checked.probs;
  trace.initial_ledger = options.initial_ledger;
  trace.merge_tol = merge_tol;
  trace.steps.reserve(schedule.size());

  JointClassicalState state = JointClassicalState::initial(checked.probs);
  std::vector<double> p = checked.probs;  // exact Markov chain for the occupations
  double cumulative = 0.0;
  double f_before = thermo::free_energy(p, checked.energies, ctx);

  std::int64_t k = 0;
  for (SwapStep step : schedule) {
    ++k;
    require(step.level_low < d && step.level_high < d && step.level_low != step.level_high,
            ErrorKind::InvalidParameters, "swap levels out of range");
    const double e_pair = checked.energies[step.level_high] - checked.energies[step.level_low];
    if (options.grid.mode == weight::Mode::Lattice) {
      // Move the bath gap so the translation lands on the ladder; the bath stays thermal at its new gap.
      const weight::LatticeSnap snap = weight::snap_to_lattice(e_pair - step.bath_gap, options.grid.spacing);
      step.bath_gap = e_pair - static_cast<double>(snap.m) * options.grid.spacing;
      step.bath_excitation = thermo::excitation_from_gap(step.bath_gap, ctx);
    }
    const double r = step.bath_excitation;
    const double delta = e_pair - step.bath_gap;
    const double lo = p[step.level_low];
    const double hi = p[step.level_high];
    const double inc = (hi * (1.0 - r) - lo * r) * delta;
    p[step.level_low] = (lo + hi) * (1.0 - r);
    p[step.level_high] = (lo + hi) * r;
    cumulative += inc;

    apply_swap_step_in_place(state, step, checked.energies, merge_tol, options);

    StepRecord rec;
    rec.k = k;
    rec.level_low = step.level_low;
    rec.level_high = step.level_high;
    rec.r = r;
    rec.bath_gap = step.bath_gap;
    rec.work_increment = inc;
    rec.cumulative_work = cumulative;
    const double f_after = thermo::free_energy(p, checked.energies, ctx);
    rec.free_energy_drop = f_before - f_after;
    f_before = f_after;
    rec.bath_excitation_after = (lo + hi) > 0.0 ? hi / (lo + hi) : r;
    if (options.record_probs) rec.system_probs = p;
    trace.steps.push_back(std::move(rec));
  }
  trace.final_probs = p;

  const double drift = state.mean_offset() - cumulative;
  require(std::abs(drift) <= 1e-10, ErrorKind::Validation, "ledger mean drifted from accumulated work");

  const WeightLedger displacement =
      WeightLedger::from_set(gather(state, 0, d), options.grid, merge_tol, 0.0);
  trace.final_ledger = with_initial(displacement, options.initial_ledger);

  for (std::size_t a = 0; a < d; ++a) {
    ConditionalLedger c;
    c.initial_level = a;
    c.probability = checked.probs[a];
    if (c.probability > 0.0) {
      PointSet set = gather(state, a, a + 1);
      double kept = 0.0;
      for (double& m : set.masses) {
        m /= c.probability;
        kept += m;
      }
      const WeightLedger cond =
          WeightLedger::from_set(std::move(set), options.grid, merge_tol, std::max(0.0, 1.0 - kept));
      c.ledger = with_initial(cond, options.initial_ledger);
    }
    trace.conditional.push_back(std::move(c));
  }
  return trace;
}

}  // namespace qwork::protocol
