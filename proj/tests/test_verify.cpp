#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "qwork/error.hpp"
#include "qwork/verify.hpp"

using namespace qwork;
using namespace qwork::verify;
using qcore::Matrix;

namespace {

const double kPeq = oracle::logistic(1.0, 1.0);

Matrix total_hamiltonian(const PermutationProtocol& pp, const TruncatedWeight& w) {
  const auto l = static_cast<Eigen::Index>(w.levels());
  const auto dim = static_cast<Eigen::Index>(pp.dim()) * l;
  Matrix h = Matrix::Zero(dim, dim);
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(pp.dim()); ++j)
    for (Eigen::Index k = 0; k < l; ++k) h(j * l + k, j * l + k) = pp.energies[j] + w.energy(k);
  return h;
}

// Largest column norm of [U, X] over columns not touched by the wrap.
double interior_commutator(const BuiltUnitary& b, const Matrix& x) {
  const Matrix u(b.u);
  const Matrix c = u * x - x * u;
  double worst = 0.0;
  for (Eigen::Index col = 0; col < c.cols(); ++col) {
    if (std::find(b.boundary_columns.begin(), b.boundary_columns.end(), static_cast<std::size_t>(col)) !=
        b.boundary_columns.end())
      continue;
    // the column of X may also mix in boundary columns; X is diagonal or a one-step shift here
    worst = std::max(worst, c.col(col).norm());
  }
  return worst;
}

OracleConfig qubit_oracle(double p, std::int64_t n, double spacing, const ThermalContext& ctx) {
  OracleConfig oc;
  oc.system_energies = {0.0, 1.0};
  oc.rho_s = qcore::DensityOperator::diagonal(std::vector<double>{1.0 - p, p}).matrix();
  oc.schedule = protocol::qubit_schedule(p, kPeq, n, ctx);
  oc.weight = TruncatedWeight::make(spacing, window_half_width(oc.system_energies, oc.schedule, spacing, 0, ctx));
  return oc;
}

}  // namespace

TEST_CASE("permutation protocols") {
  CHECK_THROWS_WITH_AS(PermutationProtocol::make({0.0, 1.0}, {0, 0}), "not a permutation", Error);
  const PermutationProtocol id = identity_protocol({0.0, 0.5, 1.0});
  CHECK(work_formula(id, std::vector<double>{0.2, 0.3, 0.5}) == 0.0);
  const BuiltUnitary b = build_unitary(id, TruncatedWeight::make(0.5, 2));
  CHECK((Matrix(b.u) - Matrix::Identity(15, 15)).norm() == 0.0);
  CHECK(b.boundary_columns.empty());
}

TEST_CASE("resonant swap is a pure permutation") {
  const double es[] = {0.0, 1.0};
  const PermutationProtocol pp = swap_protocol(es, 0, 1, 1.0);
  for (std::size_t j = 0; j < pp.dim(); ++j) CHECK(pp.translation(j) == 0.0);
  const BuiltUnitary b = build_unitary(pp, TruncatedWeight::make(0.1, 3));
  CHECK(b.boundary_columns.empty());
  CHECK(qcore::is_unitary(Matrix(b.u)));
}

TEST_CASE("swap unitary commutes with the free Hamiltonian and with translations") {
  const double es[] = {0.0, 1.0};
  const PermutationProtocol pp = swap_protocol(es, 0, 1, 0.9);
  const TruncatedWeight w = TruncatedWeight::make(0.1, 4);
  const BuiltUnitary b = build_unitary(pp, w);
  CHECK(qcore::is_unitary(Matrix(b.u), 1e-10));
  // |1_S 0_B> moves the weight up by one unit
  CHECK(b.units[2] == 1);
  CHECK(b.units[1] == -1);
  CHECK(interior_commutator(b, total_hamiltonian(pp, w)) <= 1e-9);

  // cyclic translation of the weight by one level
  const auto l = static_cast<Eigen::Index>(w.levels());
  Matrix shift = Matrix::Zero(4 * l, 4 * l);
  for (Eigen::Index j = 0; j < 4; ++j)
    for (Eigen::Index k = 0; k < l; ++k) shift(j * l + (k + 1) % l, j * l + k) = 1.0;
  CHECK((Matrix(b.u) * shift - shift * Matrix(b.u)).norm() <= 1e-12);
}

TEST_CASE("work formula") {
  // swap on tau_B (x) rho_S with p = 0.3, r = 0.29
  const double es[] = {0.0, 1.0};
  const double r = 0.29;
  const PermutationProtocol pp = swap_protocol(es, 0, 1, std::log((1.0 - r) / r));
  // basis s*2 + b
  const std::vector<double> diag{0.7 * (1.0 - r), 0.7 * r, 0.3 * (1.0 - r), 0.3 * r};
  const double w = work_formula(pp, diag);
  CHECK(std::abs(w - 0.01 * (1.0 - std::log(0.71 / 0.29))) < 1e-15);
  CHECK(std::abs(w - 1.04616e-3) < 1e-8);
  CHECK_THROWS_WITH_AS(work_formula(pp, std::vector<double>{1.0}), "dimension mismatch", Error);
}

TEST_CASE("work formula equals the dense evolution for random protocols and weight states") {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> lev(0, 4);
  const double spacing = 0.25;
  const TruncatedWeight w = TruncatedWeight::make(spacing, 12);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> e(4);
    for (double& x : e) x = spacing * lev(rng);
    const PermutationProtocol pp = random_protocol(e, {}, t % 2 == 1, rng);
    const qcore::DensityOperator rho_sb = testutil::random_density(4, rng);
    // weight confined to the central levels so nothing wraps
    const Matrix small = testutil::random_density_matrix(5, rng);
    Matrix rw = Matrix::Zero(25, 25);
    rw.block(10, 10, 5, 5) = small;
    const qcore::DensityOperator rho = qcore::tensor(rho_sb, qcore::DensityOperator(rw));
    const BuiltUnitary b = build_unitary(pp, w);
    const qcore::DensityOperator out = qcore::apply_unitary(rho, Matrix(b.u));
    auto weight_energy = [&](const qcore::DensityOperator& s) {
      const std::vector<double> d = s.diagonal_probs();
      double acc = 0.0;
      for (std::size_t g = 0; g < d.size(); ++g) acc += d[g] * w.energy(g % 25);
      return acc;
    };
    CHECK(std::abs(weight_energy(out) - weight_energy(rho) - work_formula(pp, rho_sb)) < 1e-10);
  }
}

TEST_CASE("window sizing") {
  const ThermalContext ctx(1.0);
  const OracleConfig oc = qubit_oracle(0.3, 3, 1e-3, ctx);
  std::int64_t reach = 0;
  for (const auto& s : oc.schedule) reach += std::llabs(std::llround((1.0 - s.bath_gap) / 1e-3));
  CHECK(std::llabs(oc.weight.half_width - (2 * reach + 1)) <= 6);

  OracleConfig tight = oc;
  tight.weight = TruncatedWeight::make(1e-3, reach / 2);
  CHECK_THROWS_WITH_AS(oracle_run(tight, ctx), "weight window too small", Error);
}

TEST_CASE("oracle single step") {
  const ThermalContext ctx(1.0);
  OracleConfig oc;
  oc.system_energies = {0.0, 1.0};
  oc.rho_s = qcore::DensityOperator::diagonal(std::vector<double>{0.7, 0.3}).matrix();
  oc.schedule = {protocol::make_swap_step(0, 1, 0.29, ctx)};
  oc.weight = TruncatedWeight::make(1e-5, window_half_width(oc.system_energies, oc.schedule, 1e-5, 0, ctx));
  const OracleResult r = oracle_run(oc, ctx);
  const double bound = weight::discretization_error_bound(1e-5, 1, 0.3, 0.29);
  CHECK(std::abs(r.work - 1.04616e-3) < bound + 1e-8);

  // the engine at the snapped gap agrees to rounding
  const auto [s1, w] = protocol::apply_swap_step(
      protocol::JointClassicalState::initial(std::vector<double>{0.7, 0.3}),
      protocol::make_swap_step(0, 1, r.bath_excitations[0], ctx), oc.system_energies, 0.0);
  CHECK(std::abs(r.work - w) < 1e-12);
  CHECK(std::abs(r.system_state(1, 1).real() - s1.marginal()[1]) < 1e-12);
}

TEST_CASE("oracle null protocol") {
  const ThermalContext ctx(1.0);
  const OracleResult r = oracle_run(qubit_oracle(kPeq, 3, 1e-3, ctx), ctx);
  CHECK(std::abs(r.work) < 1e-15);
}

TEST_CASE("oracle agrees with the classical engine") {
  const ThermalContext ctx(1.0);
  for (double spacing : {1e-3, 1e-4}) {
    for (std::int64_t n : {1, 2, 3, 4}) {
      if (spacing < 1e-3 && n == 4) continue;  // covered by the acceptance run's neighbour
      const double p = 0.3;
      const OracleResult r = oracle_run(qubit_oracle(p, n, spacing, ctx), ctx);
      const protocol::ProtocolTrace cont = protocol::run_qubit_protocol({p, 1.0, 1.0, n});
      CHECK(std::abs(r.work - cont.work()) <= weight::discretization_error_bound(spacing, n, p, kPeq) + 1e-9);

      // with the same snapping the engine is exact
      protocol::LedgerOptions lat;
      lat.grid = weight::Grid::lattice(spacing);
      const protocol::ProtocolTrace t = protocol::run_qubit_protocol({p, 1.0, 1.0, n}, lat);
      CHECK(std::abs(r.work - t.work()) < 1e-12);
      CHECK(std::abs(r.system_state(1, 1).real() - t.final_probs[1]) < 1e-12);
      // the weight distribution too
      for (std::size_t k = 0; k < t.final_ledger.size(); ++k) {
        const auto level = std::llround(t.final_ledger.offsets()[k] / spacing);
        CHECK(std::abs(r.weight_populations[static_cast<std::size_t>(level + r.weight_populations.size() / 2)] -
                       t.final_ledger.masses()[k]) < 1e-12);
      }
      // bath qubits are only slightly perturbed
      for (std::size_t k = 0; k < r.bath_excitations.size(); ++k)
        CHECK(std::abs(r.bath_excitations_after[k] - r.bath_excitations[k]) < 0.05);
    }
  }
}

TEST_CASE("weight start independence in the oracle") {
  const ThermalContext ctx(1.0);
  OracleConfig oc = qubit_oracle(0.3, 2, 1e-3, ctx);
  oc.weight.half_width += 10;
  const std::int64_t shifts[] = {0, 5, -5};
  const IndependenceReport rep = oracle_weight_independence(oc, ctx, shifts);
  CHECK(rep.pass);
  CHECK(rep.max_work_deviation < 1e-12);
}

TEST_CASE("engine weight independence report") {
  const double offsets[] = {0.0, 1.7, -3.2};
  const IndependenceReport rep = engine_weight_independence({0.3, 1.0, 1.0, 100}, {}, offsets);
  CHECK(rep.pass);
  CHECK(rep.works.size() == 3);
  const double single[] = {0.0};
  CHECK(engine_weight_independence({0.3, 1.0, 1.0, 10}, {}, single).pass);
}

TEST_CASE("second law sampler") {
  const ThermalContext ctx(1.0);
  // one thermal qubit, both permutations
  const std::vector<double> g = thermo::gibbs_probabilities(std::vector<double>{0.0, 1.0}, ctx);
  CHECK(work_formula(identity_protocol({0.0, 1.0}), g) == 0.0);
  CHECK(work_formula(PermutationProtocol::make({0.0, 1.0}, {1, 0}), g) <= 0.0);

  // two thermal qubits with equal gaps: swapping them does nothing
  const std::vector<double> e2{0.0, 0.7, 0.7, 1.4};
  const std::vector<double> g1 = thermo::gibbs_probabilities(std::vector<double>{0.0, 0.7}, ctx);
  const std::vector<double> p2{g1[0] * g1[0], g1[0] * g1[1], g1[1] * g1[0], g1[1] * g1[1]};
  CHECK(std::abs(work_formula(PermutationProtocol::make(e2, {0, 2, 1, 3}), p2)) < 1e-16);

  SamplerOptions opt;
  opt.trials = 1000;
  opt.seed = 42;
  const SamplerReport a = second_law_sampler({{0.0, 1.0}, {0.0, 0.5}, {0.0, 0.25}}, ctx, opt);
  CHECK(a.max_work <= 1e-12);
  const SamplerReport b = second_law_sampler({{0.0, 1.0}, {0.0, 0.5}, {0.0, 0.25}}, ctx, opt);
  CHECK(a.max_work == b.max_work);
  CHECK(a.argmax_trial == b.argmax_trial);
  opt.two_cycles_only = true;
  CHECK(second_law_sampler({{0.0, 1.0}, {0.0, 0.5}, {0.0, 0.25}}, ctx, opt).max_work <= 1e-12);
  opt.blocks = {{0, 1, 2, 3}, {4, 5, 6, 7}};
  CHECK(second_law_sampler({{0.0, 1.0}, {0.0, 0.5}, {0.0, 0.25}}, ctx, opt).max_work <= 1e-12);
}

TEST_CASE("random protocols respect blocks and seeds") {
  std::mt19937_64 r1(trial_seed(7, 3));
  std::mt19937_64 r2(trial_seed(7, 3));
  const std::vector<double> e{0, 1, 2, 3, 4, 5};
  const PermutationProtocol a = random_protocol(e, {{0, 2, 4}, {1, 3, 5}}, false, r1);
  const PermutationProtocol b = random_protocol(e, {{0, 2, 4}, {1, 3, 5}}, false, r2);
  CHECK(a.perm == b.perm);
  for (std::size_t j = 0; j < 6; ++j) CHECK(a.perm[j] % 2 == j % 2);
  std::mt19937_64 r3(5);
  const PermutationProtocol c = random_protocol(e, {}, true, r3);
  for (std::size_t j = 0; j < 6; ++j) {
    CHECK(c.perm[j] != j);
    CHECK(c.perm[c.perm[j]] == j);
  }
  CHECK(splitmix64(0) != splitmix64(1));
}

TEST_CASE("second-order expansion differs by a factor of two") {
  const ThermalContext ctx(1.0);
  const double dps[] = {1e-2, 5e-3, 2.5e-3};
  const ExpansionCheck c = expansion_check(0.3, dps, 1.0, ctx);
  CHECK(c.ratio >= 1.9);
  CHECK(c.ratio <= 2.1);
  CHECK(std::abs(c.quad_f - c.quad_f_series) < 0.01 * std::abs(c.quad_f_series));
  for (const ExpansionRow& r : c.rows) CHECK(r.delta_e <= r.delta_f);
  const double tiny[] = {1e-4, 5e-5};
  const ExpansionCheck t = expansion_check(0.3, tiny, 1.0, ctx);
  CHECK(std::abs(t.ratio - 2.0) < 0.05);
  for (const ExpansionRow& r : t.rows) {
    CHECK(std::abs(r.delta_e) < 1e-4);
    CHECK(std::abs(r.delta_f) < 1e-4);
  }
}
