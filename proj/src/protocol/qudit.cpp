#include <cmath>

#include "qwork/error.hpp"
#include "qwork/protocol.hpp"

namespace qwork::protocol {
namespace {

void check_distribution(std::span<const double> v, const char* what) {
  double total = 0.0;
  for (double x : v) {
    require(std::isfinite(x) && x >= 0.0, ErrorKind::InvalidParameters, std::string(what) + ": negative probability");
    total += x;
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorKind::InvalidParameters,
          std::string(what) + ": probabilities do not sum to 1");
}

}  // namespace

PairStepResult run_qudit_pair_step(const DiagonalState& state, std::size_t i, std::size_t j,
                                   std::span<const double> target, const ThermalContext& ctx) {
  const std::size_t d = state.dim();
  require(target.size() == d, ErrorKind::DimensionMismatch, "dimension mismatch");
  require(i < d && j < d && i != j, ErrorKind::InvalidParameters, "pair levels out of range");
  for (std::size_t l = 0; l < d; ++l) {
    if (l == i || l == j) continue;
    require(target[l] == state.probs[l], ErrorKind::InvalidParameters, "target changes a level outside the pair");
  }
  const double pair = state.probs[i] + state.probs[j];
  require(pair > 0.0, ErrorKind::InvalidParameters, "empty pair support");
  require(target[i] >= 0.0 && target[j] >= 0.0 && std::abs(target[i] + target[j] - pair) <= 1e-12,
          ErrorKind::InvalidParameters, "target does not conserve the pair population");

  PairStepResult out;
  out.step = make_swap_step(i, j, target[j] / (target[i] + target[j]), ctx);
  const double r = out.step.bath_excitation;
  const double delta = (state.energies[j] - state.energies[i]) - out.step.bath_gap;
  out.work = (state.probs[j] * (1.0 - r) - state.probs[i] * r) * delta;
  out.state = state;
  out.state.probs[i] = pair * (1.0 - r);
  out.state.probs[j] = pair * r;
  return out;
}

std::vector<std::vector<double>> two_phase_path(std::span<const double> rho, std::span<const double> sigma,
                                                std::size_t pivot) {
  require(rho.size() == sigma.size(), ErrorKind::DimensionMismatch, "dimension mismatch");
  require(pivot < rho.size(), ErrorKind::InvalidParameters, "pivot level out of range");
  check_distribution(rho, "initial state");
  check_distribution(sigma, "target state");
  for (double s : sigma) require(s > 0.0, ErrorKind::InvalidParameters, "unreachable target");

  std::vector<std::vector<double>> path;
  std::vector<double> w(rho.begin(), rho.end());
  path.push_back(w);
  // Phase 1: drain every over-populated level into the pivot.
  for (std::size_t l = 0; l < w.size(); ++l) {
    if (l == pivot || !(w[l] > sigma[l])) continue;
    w[pivot] += w[l] - sigma[l];
    w[l] = sigma[l];
    path.push_back(w);
  }
  // Phase 2: fill the under-populated ones from it.
  for (std::size_t l = 0; l < w.size(); ++l) {
    if (l == pivot || !(w[l] < sigma[l])) continue;
    w[pivot] -= sigma[l] - w[l];
    w[l] = sigma[l];
    path.push_back(w);
  }
  if (w[pivot] != sigma[pivot]) {
    require(std::abs(w[pivot] - sigma[pivot]) <= 1e-12, ErrorKind::Validation, "path does not reach the target");
    path.back()[pivot] = sigma[pivot];
  }
  return path;
}

std::vector<SwapStep> path_schedule(const std::vector<std::vector<double>>& path, std::int64_t steps,
                                    const ThermalContext& ctx) {
  require(!path.empty(), ErrorKind::InvalidParameters, "path has no waypoints");
  struct Segment {
    std::size_t i;
    std::size_t j;
    const std::vector<double>* from;
    const std::vector<double>* to;
  };
  std::vector<Segment> segments;
  for (std::size_t w = 0; w + 1 < path.size(); ++w) {
    const std::vector<double>& a = path[w];
    const std::vector<double>& b = path[w + 1];
    require(a.size() == b.size(), ErrorKind::DimensionMismatch, "dimension mismatch");
    std::vector<std::size_t> diff;
    for (std::size_t l = 0; l < a.size(); ++l) {
      if (a[l] != b[l]) diff.push_back(l);
    }
    if (diff.empty()) continue;
    require(diff.size() == 2, ErrorKind::InvalidParameters, "path segment changes more than one level pair");
    require(std::abs((a[diff[0]] + a[diff[1]]) - (b[diff[0]] + b[diff[1]])) <= 1e-12, ErrorKind::InvalidParameters,
            "path segment does not conserve the pair population");
    segments.push_back({diff[0], diff[1], &a, &b});
  }
  require(steps >= 1, ErrorKind::InvalidParameters, "empty schedule");
  if (segments.empty()) return {};
  const auto n_seg = static_cast<std::int64_t>(segments.size());
  require(steps >= n_seg, ErrorKind::InvalidParameters, "fewer steps than path segments");

  std::vector<SwapStep> schedule;
  schedule.reserve(static_cast<std::size_t>(steps));
  const std::int64_t per = steps / n_seg;
  for (std::int64_t s = 0; s < n_seg; ++s) {
    const Segment& seg = segments[static_cast<std::size_t>(s)];
    const std::int64_t n = (s + 1 == n_seg) ? steps - per * (n_seg - 1) : per;
    const double ai = (*seg.from)[seg.i];
    const double aj = (*seg.from)[seg.j];
    const double bi = (*seg.to)[seg.i];
    const double bj = (*seg.to)[seg.j];
    for (std::int64_t k = 1; k <= n; ++k) {
      const double f = static_cast<double>(k) / static_cast<double>(n);
      const double ti = ai + f * (bi - ai);
      const double tj = aj + f * (bj - aj);
      require(ti + tj > 0.0, ErrorKind::InvalidParameters, "empty pair support");
      schedule.push_back(make_swap_step(seg.i, seg.j, tj / (ti + tj), ctx));
    }
  }
  return schedule;
}

ProtocolTrace run_state_to_state(const DiagonalState& rho, const DiagonalState& sigma, const ThermalContext& ctx,
                                 std::int64_t steps, std::optional<std::vector<std::vector<double>>> path,
                                 const LedgerOptions& options) {
  require(rho.dim() == sigma.dim(), ErrorKind::DimensionMismatch, "dimension mismatch");
  for (std::size_t l = 0; l < rho.dim(); ++l) {
    require(rho.energies[l] == sigma.energies[l], ErrorKind::InvalidParameters, "states use different Hamiltonians");
  }
  if (!path) path = two_phase_path(rho.probs, sigma.probs);
  require(path->front() == rho.probs, ErrorKind::InvalidParameters, "path does not start at the initial state");
  for (std::size_t l = 0; l < rho.dim(); ++l) {
    require(std::abs(path->back()[l] - sigma.probs[l]) <= 1e-12, ErrorKind::InvalidParameters,
            "path does not end at the target state");
  }
  const std::vector<SwapStep> schedule = path_schedule(*path, steps, ctx);
  return run_schedule(rho, schedule, ctx, options);
}

}  // namespace qwork::protocol
