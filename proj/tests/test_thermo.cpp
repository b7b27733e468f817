#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "qwork/error.hpp"
#include "qwork/thermo.hpp"

using namespace qwork;
using namespace qwork::thermo;
using qcore::DensityOperator;
using qcore::HermitianOperator;

TEST_CASE("thermal context") {
  const ThermalContext ctx(2.5);
  CHECK(std::abs(ctx.beta() * ctx.temperature() - 1.0) < 1e-14);
  CHECK_THROWS_AS(ThermalContext(0.0), Error);
  CHECK_THROWS_AS(ThermalContext(-1.0), Error);
  CHECK(ThermalContext::from_beta(4.0).temperature() == doctest::Approx(0.25));
}

TEST_CASE("gibbs state") {
  const ThermalContext ctx(1.0);
  const double zero[] = {0.0, 0.0};
  const DensityOperator half = gibbs_state(HermitianOperator::diagonal(zero), ctx);
  CHECK(std::abs(half.matrix()(0, 0).real() - 0.5) < 1e-15);

  const double e[] = {0.0, 1.0};
  const std::vector<double> g = gibbs_probabilities(e, ctx);
  const std::vector<double> ref = oracle::gibbs({0.0, 1.0}, 1.0);
  CHECK(std::abs(g[0] - ref[0]) < 1e-15);
  CHECK(std::abs(g[1] - 0.268941) < 1e-6);

  const DensityOperator cold = gibbs_state(HermitianOperator::diagonal(e), ThermalContext::from_beta(50.0));
  CHECK(std::abs(cold.matrix()(0, 0).real() - 1.0) < 1e-10);
  CHECK(std::abs(cold.matrix()(1, 1).real()) < 1e-10);

  // non-diagonal H: gibbs state commutes with H
  std::mt19937_64 rng(3);
  const HermitianOperator h(testutil::random_density_matrix(3, rng) * 3.0);
  const DensityOperator tau = gibbs_state(h, ctx);
  CHECK((tau.matrix() * h.matrix() - h.matrix() * tau.matrix()).norm() < 1e-10);
}

TEST_CASE("free energy") {
  const ThermalContext ctx(1.0);
  const double e[] = {0.0, 1.0};
  const HermitianOperator h = HermitianOperator::diagonal(e);
  const double excited[] = {0.0, 1.0};
  CHECK(free_energy(DensityOperator::diagonal(excited), h, ctx) == doctest::Approx(1.0).epsilon(1e-14));
  const double p[] = {0.3, 0.7};
  const double f = free_energy(DensityOperator::diagonal(p), h, ctx);
  CHECK(std::abs(f - oracle::free_energy({0.3, 0.7}, {0.0, 1.0}, 1.0)) < 1e-14);
  CHECK(std::abs(f - 0.089136) < 1e-6);

  // the Gibbs state minimizes F
  std::mt19937_64 rng(77);
  const double e3[] = {0.0, 0.4, 1.3};
  const HermitianOperator h3 = HermitianOperator::diagonal(e3);
  const double f_min = free_energy(gibbs_state(h3, ctx), h3, ctx);
  for (int t = 0; t < 1000; ++t) {
    CHECK(free_energy(testutil::random_density(3, rng), h3, ctx) >= f_min - 1e-10);
  }

  // F(rho) - F(tau) = T D(rho || tau) for diagonal rho
  for (int t = 0; t < 20; ++t) {
    const std::vector<double> q = oracle::random_simplex(3, rng);
    const std::vector<double> g = gibbs_probabilities(e3, ctx);
    const double lhs = free_energy(q, e3, ctx) - free_energy(g, e3, ctx);
    CHECK(std::abs(lhs - relative_entropy(q, g)) < 1e-10);
  }
}

TEST_CASE("gibbs state maximizes entropy at fixed energy") {
  const ThermalContext ctx(0.7);
  const std::vector<double> e{0.0, 0.5, 1.0, 1.7};
  const std::vector<double> g = gibbs_probabilities(e, ctx);
  const double s0 = oracle::entropy(g);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1e-3);
  for (int t = 0; t < 1000; ++t) {
    // perturbation orthogonal to (1,...) and to e keeps normalization and mean energy
    std::vector<double> v(4);
    for (double& x : v) x = n(rng);
    Eigen::Vector4d vv(v[0], v[1], v[2], v[3]);
    Eigen::Vector4d ones = Eigen::Vector4d::Ones().normalized();
    Eigen::Vector4d ee(e[0], e[1], e[2], e[3]);
    ee -= ee.dot(ones) * ones;
    ee.normalize();
    vv -= vv.dot(ones) * ones + vv.dot(ee) * ee;
    std::vector<double> q(4);
    for (int k = 0; k < 4; ++k) q[k] = g[k] + vv[k];
    CHECK(oracle::entropy(q) <= s0 + 1e-10);
  }
}

TEST_CASE("binary entropy and derivatives") {
  CHECK(binary_entropy(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  const double r = oracle::logistic(1.0, 1.0);
  CHECK(std::abs(binary_entropy_prime(r) - 1.0) < 1e-12);
  CHECK(binary_entropy_double_prime(0.5) == doctest::Approx(-4.0));
  CHECK_THROWS_WITH_AS(binary_entropy_prime(0.0), "domain error", Error);
  CHECK_THROWS_WITH_AS(binary_entropy_double_prime(1.0), "domain error", Error);
  CHECK_THROWS_WITH_AS(binary_entropy(1.5), "domain error", Error);
  double prev = binary_entropy_prime(0.01);
  for (double q = 0.02; q < 0.995; q += 0.01) {
    CHECK(binary_entropy_prime(q) < prev);
    CHECK(binary_entropy_double_prime(q) < 0.0);
    prev = binary_entropy_prime(q);
  }
}

TEST_CASE("relative binary entropy") {
  CHECK(relative_binary_entropy(0.3, 0.3) == 0.0);
  CHECK(std::abs(relative_binary_entropy(0.3, 0.5) - oracle::d_c(0.3, 0.5)) < 1e-15);
  CHECK(std::abs(relative_binary_entropy(0.3, 0.5) - 0.082282) < 1e-6);
  const double p_eq = oracle::logistic(1.0, 1.0);
  CHECK(std::abs(relative_binary_entropy(0.3, p_eq) - oracle::d_c(0.3, p_eq)) < 1e-15);
  CHECK(relative_binary_entropy(0.0, 0.5) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_WITH_AS(relative_binary_entropy(0.3, 0.0), "divergent", Error);
  CHECK(relative_binary_entropy(0.0, 0.0) == 0.0);
}

TEST_CASE("gap and excitation are inverse") {
  const ThermalContext ctx(1.0);
  CHECK(gap_from_excitation(0.5, ctx) == 0.0);
  CHECK(std::abs(excitation_from_gap(1.0, ctx) - 0.268941) < 1e-6);
  CHECK_THROWS_WITH_AS(gap_from_excitation(0.0, ctx), "domain error", Error);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  const ThermalContext warm(1.7);
  for (int t = 0; t < 100; ++t) {
    const double r = u(rng);
    CHECK(std::abs(excitation_from_gap(gap_from_excitation(r, warm), warm) - r) < 1e-12);
    const QubitGap q = qubit_from_excitation(r, warm);
    CHECK(std::abs(q.gap - warm.temperature() * std::log((1.0 - r) / r)) < 1e-12);
  }
}

TEST_CASE("virtual temperature") {
  CHECK(virtual_beta(1.0, 2.0, 0.5, 2.0) == doctest::Approx(2.0));
  CHECK(virtual_beta(1.0, 1.0, 0.5, 2.0) == 0.0);
  CHECK_THROWS_WITH_AS(virtual_beta(1.0, 1.0, 1.0, 2.0), "degenerate transition", Error);

  // System transition at its own population ratio against the bath qubit at
  // r = p - dp: beta_v is small and negative.
  const double p = 0.3, dp = 1e-4, es = 1.0;
  const double r = p - dp;
  const double beta_s = std::log((1.0 - p) / p) / es;
  const double e_b = std::log((1.0 - r) / r);
  const double bv = virtual_beta(es, beta_s, e_b, 1.0);
  const double predicted =
      dp * (-1.0 / (1.0 - p) - 1.0 / p) / (es - std::log((1.0 - p) / p));
  CHECK(bv < 0.0);
  CHECK(std::abs(bv - predicted) <= 0.01 * std::abs(predicted));
}

TEST_CASE("continuity bounds") {
  CHECK(fannes_entropy_bound(1.0, std::exp(1.0)) == doctest::Approx(1.0));
  CHECK(fannes_entropy_bound(0.0, 4.0) == 0.0);
  CHECK(std::abs(wavepacket_distance_bound(1.0, 100.0) - 0.1) < 1e-15);
  double prev = wavepacket_distance_bound(1.0, 1.0);
  for (double l = 2.0; l < 1000.0; l *= 2.0) {
    const double b = wavepacket_distance_bound(1.0, l);
    CHECK(b < prev);
    prev = b;
  }
}
