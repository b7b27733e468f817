#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "qwork/error.hpp"
#include "qwork/protocol.hpp"

using namespace qwork;
using namespace qwork::protocol;
using thermo::ThermalContext;

namespace {

const double kPeq = oracle::logistic(1.0, 1.0);

// Compares a ledger against an offset -> mass map, clustering offsets that
// agree within `tol`.
void check_matches(const WeightLedger& l, const std::map<double, double>& ref, double scale, double tol) {
  std::vector<std::pair<double, double>> clusters;
  for (const auto& [x, m] : ref) {
    if (!clusters.empty() && std::abs(x - clusters.back().first) <= tol) {
      clusters.back().second += m;
    } else {
      clusters.emplace_back(x, m);
    }
  }
  REQUIRE(l.size() == clusters.size());
  for (std::size_t k = 0; k < l.size(); ++k) {
    CHECK(std::abs(l.offsets()[k] - clusters[k].first) <= tol);
    CHECK(std::abs(l.masses()[k] - clusters[k].second * scale) <= 1e-13);
  }
}

LedgerOptions exact_options() {
  LedgerOptions o;
  o.merge_tol = 1e-13;
  o.mass_floor = 0.0;
  return o;
}

}  // namespace

TEST_CASE("qubit schedule") {
  const std::vector<double> r = qubit_excitations(0.3, kPeq, 2);
  REQUIRE(r.size() == 2);
  CHECK(std::abs(r[0] - (0.3 + 0.5 * (kPeq - 0.3))) < 1e-15);
  CHECK(std::abs(r[0] - 0.284471) < 1e-6);
  CHECK(r[1] == doctest::Approx(kPeq).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(qubit_excitations(0.3, kPeq, 0), "empty schedule", Error);
  for (double x : qubit_excitations(0.4, 0.4, 10)) CHECK(x == 0.4);
  const std::vector<double> mono = qubit_excitations(0.3, kPeq, 50);
  for (std::size_t k = 1; k < mono.size(); ++k) CHECK(mono[k] < mono[k - 1]);

  const ThermalContext ctx(1.0);
  for (const SwapStep& s : qubit_schedule(0.3, kPeq, 20, ctx)) {
    CHECK(std::abs(s.bath_gap - std::log((1.0 - s.bath_excitation) / s.bath_excitation)) < 1e-12);
    CHECK(s.level_low != s.level_high);
  }
}

TEST_CASE("single swap step") {
  const ThermalContext ctx(1.0);
  const std::vector<double> energies{0.0, 1.0};
  const JointClassicalState s0 = JointClassicalState::initial(std::vector<double>{0.7, 0.3});

  // r = 0.29: work = dp (E_S - E_B)
  const SwapStep step = make_swap_step(0, 1, 0.29, ctx);
  const auto [s1, w] = apply_swap_step(s0, step, energies, 0.0);
  const double e_b = std::log(0.71 / 0.29);
  CHECK(std::abs(w - 0.01 * (1.0 - e_b)) < 1e-15);
  CHECK(std::abs(w - 1.04616e-3) < 1e-8);
  CHECK(std::abs(s1.mean_offset() - w) < 1e-16);
  const std::vector<double> marg = s1.marginal();
  CHECK(std::abs(marg[1] - 0.29) < 1e-15);
  CHECK(std::abs(s1.total_mass() - 1.0) < 1e-15);

  // fixed point: bath ratio equals the system ratio
  const auto [s2, w2] = apply_swap_step(s0, make_swap_step(0, 1, 0.3, ctx), energies, 0.0);
  CHECK(std::abs(w2) < 1e-16);
  CHECK(std::abs(s2.marginal()[1] - 0.3) < 1e-15);

  // entry-level branch structure
  const double delta = 1.0 - e_b;
  for (const auto& e : s1.entries()) {
    if (e.initial_level == 1 && e.current_level == 0) {
      CHECK(std::abs(e.offset - delta) < 1e-15);
      CHECK(std::abs(e.mass - 0.3 * 0.71) < 1e-15);
    }
    if (e.initial_level == 0 && e.current_level == 1) {
      CHECK(std::abs(e.offset + delta) < 1e-15);
      CHECK(std::abs(e.mass - 0.7 * 0.29) < 1e-15);
    }
  }
}

TEST_CASE("mass is conserved over many random steps") {
  const ThermalContext ctx(0.8);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::uniform_int_distribution<int> lv(0, 2);
  const std::vector<double> energies{0.0, 0.3, 1.1};
  JointClassicalState s = JointClassicalState::initial(std::vector<double>{0.5, 0.3, 0.2});
  LedgerOptions opt;
  opt.max_points = 64;
  double acc = 0.0;
  for (int t = 0; t < 10000; ++t) {
    std::size_t i = static_cast<std::size_t>(lv(rng));
    std::size_t j = static_cast<std::size_t>(lv(rng));
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    acc += apply_swap_step_in_place(s, make_swap_step(i, j, u(rng), ctx), energies, 1e-9, opt);
  }
  CHECK(std::abs(s.total_mass() - 1.0) < 1e-12);
  CHECK(std::abs(s.mean_offset() - acc) < 1e-10);
}

TEST_CASE("engine ledgers match brute-force trajectory enumeration") {
  for (int n : {1, 2, 5, 9}) {
    for (double p : {0.3, 0.05, 0.8}) {
      const double es = 1.3;
      const double t = 0.9;
      const double p_eq = oracle::logistic(es, t);
      const ProtocolTrace tr = run_qubit_protocol({p, es, t, n}, exact_options());
      const oracle::Trajectories ref = oracle::enumerate_qubit(p, es, t, oracle::linear_excitations(p, p_eq, n));
      CHECK(std::abs(tr.work() - ref.mean) < 1e-14);
      CHECK(std::abs(weight::mean_energy(tr.final_ledger) - ref.mean) < 1e-14);
      check_matches(tr.final_ledger, ref.all, 1.0, 1e-12);
      REQUIRE(tr.conditional.size() == 2);
      CHECK(tr.conditional[0].probability == doctest::Approx(1.0 - p));
      check_matches(*tr.conditional[0].ledger, ref.given[0], 1.0 / (1.0 - p), 1e-12);
      check_matches(*tr.conditional[1].ledger, ref.given[1], 1.0 / p, 1e-12);
    }
  }
}

TEST_CASE("qubit protocol converges to the relative entropy") {
  const double ref = oracle::d_c(0.3, kPeq);
  double prev = 1.0;
  for (std::int64_t n : {10, 100, 1000, 10000}) {
    const ProtocolTrace tr = run_qubit_protocol({0.3, 1.0, 1.0, n});
    const double gap = ref - tr.work();
    CHECK(gap > 0.0);
    CHECK(gap < prev);
    prev = gap;
    CHECK(std::abs(tr.work() - weight::mean_energy(tr.final_ledger)) < 1e-10);
    const DiagonalState rho = DiagonalState::make({0.7, 0.3}, {0.0, 1.0});
    const DiagonalState tau = thermal_state({0.0, 1.0}, ThermalContext(1.0));
    CHECK(optimality_gap(tr.work(), rho, tau, ThermalContext(1.0)) >= -1e-9);
    // every step gives at most the drop in system free energy
    for (const StepRecord& s : tr.steps) CHECK(s.work_increment <= s.free_energy_drop + 1e-12);
    if (n == 10000) {
      CHECK(std::abs(tr.work() - ref) < 5e-6);
      // each bath qubit is only slightly perturbed
      double worst = 0.0;
      for (const StepRecord& s : tr.steps) worst = std::max(worst, std::abs(s.bath_excitation_after - s.r));
      CHECK(worst < 10.0 / static_cast<double>(n));
    }
  }
}

TEST_CASE("null protocol") {
  const ProtocolTrace tr = run_qubit_protocol({kPeq, 1.0, 1.0, 50});
  CHECK(std::abs(tr.work()) < 1e-15);
  CHECK(tr.final_ledger.size() == 1);
  const DiagonalState rho = DiagonalState::make({0.6, 0.4}, {0.0, 1.0});
  CHECK(optimality_gap(0.0, rho, rho, ThermalContext(1.0)) == 0.0);
}

TEST_CASE("isothermal expansion") {
  const ProtocolTrace tr = run_isothermal_expansion(1.0, 10000);
  CHECK(std::abs(tr.work() - std::log(2.0)) < 1e-3);
  // one peak: the conditional ledger of the empty level has no mass
  CHECK(tr.conditional[1].probability == 0.0);
  CHECK(std::sqrt(weight::variance(tr.final_ledger)) < 0.05);
  const WeightLedger a = asymptotic_weight_distribution(0.0, 0.5, 1.0);
  REQUIRE(a.size() == 1);
  CHECK(std::abs(a.offsets()[0] - std::log(2.0)) < 1e-15);
}

TEST_CASE("asymptotic two-peak distribution") {
  const WeightLedger a = asymptotic_weight_distribution(0.3, kPeq, 1.0);
  REQUIRE(a.size() == 2);
  CHECK(std::abs(a.offsets()[0] - std::log(0.7 / (1.0 - kPeq))) < 1e-15);
  CHECK(std::abs(a.offsets()[1] - std::log(0.3 / kPeq)) < 1e-15);
  CHECK(std::abs(a.offsets()[0] + 0.043413) < 1e-6);
  CHECK(std::abs(a.offsets()[1] - 0.109289) < 1e-6);
  CHECK(a.masses()[0] == doctest::Approx(0.7));
  CHECK(std::abs(weight::mean_energy(a) - oracle::d_c(0.3, kPeq)) < 1e-15);
  const WeightLedger same = asymptotic_weight_distribution(0.4, 0.4, 2.0);
  CHECK(same.size() == 1);
  CHECK(std::abs(same.offsets()[0]) < 1e-15);
}

TEST_CASE("finite-N corrections") {
  const ConditionalMeans z = finite_n_mean_corrections(0.4, 0.4, 1.0, 100);
  CHECK(z.ground == 0.0);
  CHECK(z.excited == 0.0);
  CHECK(finite_n_variance(0.4, 0.4, 1.0, 100) == 0.0);

  const double v = finite_n_variance(0.3, kPeq, 1.0, 1000);
  const double ref = (0.3 - kPeq) * (std::log((1.0 - kPeq) / kPeq) - std::log(0.7 / 0.3)) / 1000.0;
  CHECK(v > 0.0);
  CHECK(std::abs(v - ref) < 1e-18);
  CHECK(std::abs(v - 4.7423e-6) < 1e-9);

  const ConditionalMeans far = finite_n_mean_corrections(0.3, kPeq, 1.0, 100000000);
  CHECK(std::abs(far.ground - std::log(0.7 / (1.0 - kPeq))) < 1e-8);
  CHECK(std::abs(far.excited - std::log(0.3 / kPeq)) < 1e-8);

  // against the simulation at N = 1000
  const ProtocolTrace tr = run_qubit_protocol({0.3, 1.0, 1.0, 1000});
  const ConditionalMeans m = finite_n_mean_corrections(0.3, kPeq, 1.0, 1000);
  const double e0 = std::log(0.7 / (1.0 - kPeq));
  const double e1 = std::log(0.3 / kPeq);
  const double sim0 = weight::mean_energy(*tr.conditional[0].ledger);
  const double sim1 = weight::mean_energy(*tr.conditional[1].ledger);
  CHECK(std::abs(sim0 - m.ground) <= 2.0 * std::abs(m.ground - e0));
  CHECK(std::abs(sim1 - m.excited) <= 2.0 * std::abs(m.excited - e1));
  CHECK(std::abs(weight::variance(*tr.conditional[0].ledger) - v) <= 0.2 * v);
  CHECK(std::abs(weight::variance(*tr.conditional[1].ledger) - v) <= 0.2 * v);
}

TEST_CASE("weight start independence in the engine") {
  const ProtocolTrace base = run_qubit_protocol({0.3, 1.0, 1.0, 100});
  for (double a : {1.7, -3.2}) {
    LedgerOptions o;
    o.initial_ledger = WeightLedger::point(a);
    const ProtocolTrace tr = run_qubit_protocol({0.3, 1.0, 1.0, 100}, o);
    CHECK(std::abs(tr.work() - base.work()) < 1e-12);
    REQUIRE(tr.final_ledger.size() == base.final_ledger.size());
    for (std::size_t k = 0; k < base.final_ledger.size(); ++k) {
      CHECK(std::abs(tr.final_ledger.offsets()[k] - base.final_ledger.offsets()[k] - a) < 1e-12);
      CHECK(tr.final_ledger.masses()[k] == base.final_ledger.masses()[k]);
    }
  }
}

TEST_CASE("lattice mode keeps offsets on the grid") {
  LedgerOptions o;
  o.grid = weight::Grid::lattice(1e-3);
  const ProtocolTrace tr = run_qubit_protocol({0.3, 1.0, 1.0, 200}, o);
  for (double x : tr.final_ledger.offsets()) {
    const double u = x / 1e-3;
    CHECK(std::abs(u - std::nearbyint(u)) < 1e-6);
  }
  const double bound = weight::discretization_error_bound(1e-3, 200, 0.3, kPeq);
  const ProtocolTrace cont = run_qubit_protocol({0.3, 1.0, 1.0, 200});
  CHECK(std::abs(tr.work() - cont.work()) <= bound + 1e-9);
}

TEST_CASE("qudit pair step") {
  const ThermalContext ctx(1.0);
  const DiagonalState s = DiagonalState::make({0.7, 0.2, 0.1}, {0.0, 0.5, 1.0});
  const std::vector<double> target{0.699, 0.2, 0.101};
  const PairStepResult r = run_qudit_pair_step(s, 0, 2, target, ctx);
  const double rb = 0.101 / 0.8;
  const double e_b = std::log((1.0 - rb) / rb);
  CHECK(std::abs(r.step.bath_excitation - rb) < 1e-15);
  CHECK(std::abs(r.work - (-0.001 * (1.0 - e_b))) < 1e-15);
  CHECK(std::abs(r.state.probs[2] - 0.101) < 1e-15);

  const PairStepResult none = run_qudit_pair_step(s, 0, 2, s.probs, ctx);
  CHECK(std::abs(none.work) < 1e-17);

  const DiagonalState empty = DiagonalState::make({1.0, 0.0, 0.0}, {0.0, 0.5, 1.0});
  CHECK_THROWS_WITH_AS(run_qudit_pair_step(empty, 1, 2, empty.probs, ctx), "empty pair support", Error);

  // work matches the free-energy drop to first order in dp
  auto err = [&](double dp) {
    const std::vector<double> tg{0.7 - dp, 0.2, 0.1 + dp};
    const PairStepResult q = run_qudit_pair_step(s, 0, 2, tg, ctx);
    return q.work - (free_energy(s, ctx) - free_energy(q.state, ctx));
  };
  const double e1 = err(2e-3);
  const double e2 = err(1e-3);
  CHECK(e1 < 0.0);
  CHECK(std::abs(e1 / e2 - 4.0) < 0.05);
}

TEST_CASE("two-phase path and state-to-state runs") {
  const ThermalContext ctx(1.0);
  const std::vector<double> e{0.0, 0.6, 1.5};
  const DiagonalState rho = DiagonalState::make({0.2, 0.3, 0.5}, e);
  const DiagonalState tau = thermal_state(e, ctx);
  const auto path = two_phase_path(rho.probs, tau.probs);
  for (std::size_t k = 1; k < path.size(); ++k) {
    int changed = 0;
    for (std::size_t l = 0; l < 3; ++l) changed += path[k][l] != path[k - 1][l];
    CHECK(changed == 2);
  }
  const double df = free_energy(rho, ctx) - free_energy(tau, ctx);
  const ProtocolTrace tr = run_state_to_state(rho, tau, ctx, 4000);
  CHECK(df - tr.work() > 0.0);
  CHECK(df - tr.work() < 0.01 * df);
  CHECK(std::abs(tr.work() - weight::mean_energy(tr.final_ledger)) < 1e-10);

  // another pivot: same limit
  const ProtocolTrace tr2 = run_state_to_state(rho, tau, ctx, 4000, two_phase_path(rho.probs, tau.probs, 2));
  CHECK(std::abs(tr2.work() - df) < 0.01 * df);

  // sigma = rho gives nothing; zeros in sigma are unreachable
  CHECK(std::abs(run_state_to_state(rho, rho, ctx, 10).work()) < 1e-15);
  const DiagonalState hole = DiagonalState::make({0.5, 0.5, 0.0}, e);
  CHECK_THROWS_WITH_AS(run_state_to_state(rho, hole, ctx, 10), "unreachable target", Error);

  // reversibility improves with N
  double prev = 1.0;
  for (std::int64_t n : {100, 1000, 10000}) {
    const ProtocolTrace fwd = run_state_to_state(rho, tau, ctx, n);
    const DiagonalState mid = DiagonalState::make(fwd.final_probs, e);
    const ProtocolTrace back = run_state_to_state(mid, rho, ctx, n);
    const double net = std::abs(fwd.work() + back.work());
    CHECK(net < prev);
    prev = net;
  }
  CHECK(prev < 0.01 * df);
}

TEST_CASE("n-copy convolution") {
  const WeightLedger a = asymptotic_weight_distribution(0.3, kPeq, 1.0);
  const WeightLedger one = n_copy_convolution(a, 1);
  CHECK(one.size() == a.size());
  const WeightLedger two = n_copy_convolution(a, 2);
  REQUIRE(two.size() == 3);
  CHECK(two.masses()[0] == doctest::Approx(0.49));
  CHECK(two.masses()[1] == doctest::Approx(0.42));
  CHECK(two.masses()[2] == doctest::Approx(0.09));
  const double mu = weight::mean_energy(a);
  const double var = weight::variance(a);
  double prev_ratio = 0.0;
  for (int n : {1, 4, 16, 64}) {
    const WeightLedger c = n_copy_convolution(a, n, 1e-12);
    CHECK(std::abs(weight::mean_energy(c) - n * mu) < 1e-12 * n);
    CHECK(std::abs(weight::variance(c) - n * var) < 1e-10 * n);
    const double rel = std::sqrt(weight::variance(c)) / weight::mean_energy(c);
    if (prev_ratio > 0.0) CHECK(std::abs(prev_ratio / rel - 2.0) < 1e-6);
    prev_ratio = rel;
  }
}
