#include "qwork/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "qwork/error.hpp"

namespace qwork::thermo {

using qcore::DensityOperator;
using qcore::HermitianOperator;

ThermalContext::ThermalContext(double temperature) : temperature_(temperature), beta_(1.0 / temperature) {
  require(std::isfinite(temperature) && temperature > 0.0, ErrorKind::InvalidParameters,
          "temperature must be positive and finite");
}

ThermalContext ThermalContext::from_beta(double beta) {
  require(std::isfinite(beta) && beta > 0.0, ErrorKind::InvalidParameters, "beta must be positive and finite");
  return ThermalContext(1.0 / beta);
}

QubitGap qubit_from_excitation(double r, const ThermalContext& ctx) { return {gap_from_excitation(r, ctx), r}; }

QubitGap qubit_from_gap(double gap, const ThermalContext& ctx) { return {gap, excitation_from_gap(gap, ctx)}; }

std::vector<double> gibbs_probabilities(std::span<const double> energies, const ThermalContext& ctx) {
  require(!energies.empty(), ErrorKind::InvalidParameters, "empty spectrum");
  const double e_min = *std::min_element(energies.begin(), energies.end());
  std::vector<double> w(energies.size());
  double z = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] = std::exp(-ctx.beta() * (energies[k] - e_min));
    z += w[k];
  }
  for (double& x : w) x /= z;
  return w;
}

DensityOperator gibbs_state(const HermitianOperator& h, const ThermalContext& ctx) {
  Eigen::SelfAdjointEigenSolver<qcore::Matrix> solver(h.matrix());
  const Eigen::VectorXd& e = solver.eigenvalues();
  const std::vector<double> w = gibbs_probabilities(std::span<const double>(e.data(), static_cast<std::size_t>(e.size())), ctx);
  Eigen::VectorXd wv(e.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) wv(k) = w[static_cast<std::size_t>(k)];
  const qcore::Matrix& v = solver.eigenvectors();
  qcore::Matrix rho = v * wv.cast<qcore::Complex>().asDiagonal() * v.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityOperator(std::move(rho), qcore::Unchecked{});
}

double free_energy(const DensityOperator& rho, const HermitianOperator& h, const ThermalContext& ctx) {
  return qcore::expectation(rho, h) - ctx.temperature() * qcore::von_neumann_entropy(rho);
}

double free_energy(std::span<const double> probs, std::span<const double> energies, const ThermalContext& ctx) {
  require(probs.size() == energies.size(), ErrorKind::DimensionMismatch, "dimension mismatch");
  double mean = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) mean += probs[k] * energies[k];
  return mean - ctx.temperature() * qcore::shannon_entropy(probs);
}

double relative_entropy(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size(), ErrorKind::DimensionMismatch, "dimension mismatch");
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] <= 0.0) continue;
    if (q[k] <= 0.0) return std::numeric_limits<double>::infinity();
    d += p[k] * std::log(p[k] / q[k]);
  }
  return d;
}

double binary_entropy(double q) {
  require(q >= 0.0 && q <= 1.0, ErrorKind::InvalidParameters, "domain error");
  double s = 0.0;
  if (q > 0.0) s -= q * std::log(q);
  if (q < 1.0) s -= (1.0 - q) * std::log1p(-q);
  return s;
}

double binary_entropy_prime(double q) {
  require(q > 0.0 && q < 1.0, ErrorKind::InvalidParameters, "domain error");
  return std::log1p(-q) - std::log(q);
}

double binary_entropy_double_prime(double q) {
  require(q > 0.0 && q < 1.0, ErrorKind::InvalidParameters, "domain error");
  return -1.0 / (1.0 - q) - 1.0 / q;
}

double relative_binary_entropy(double p, double q) {
  require(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0, ErrorKind::InvalidParameters, "domain error");
  if (q == 0.0 || q == 1.0) {
    require(p == q, ErrorKind::InvalidParameters, "divergent");
    return 0.0;
  }
  double d = 0.0;
  if (p > 0.0) d += p * std::log(p / q);
  if (p < 1.0) d += (1.0 - p) * (std::log1p(-p) - std::log1p(-q));
  return std::max(d, 0.0);
}

double gap_from_excitation(double r, const ThermalContext& ctx) {
  require(r > 0.0 && r < 1.0, ErrorKind::InvalidParameters, "domain error");
  return ctx.temperature() * (std::log1p(-r) - std::log(r));
}

double excitation_from_gap(double gap, const ThermalContext& ctx) {
  require(std::isfinite(gap), ErrorKind::InvalidParameters, "domain error");
  const double x = ctx.beta() * gap;
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

double virtual_beta(double e1, double beta1, double e2, double beta2) {
  require(e1 != e2, ErrorKind::InvalidParameters, "degenerate transition");
  return (e1 * beta1 - e2 * beta2) / (e1 - e2);
}

double fannes_entropy_bound(double trace_distance, double d2) {
  require(trace_distance >= 0.0 && trace_distance <= 1.0 && d2 > 0.0, ErrorKind::InvalidParameters, "domain error");
  if (trace_distance == 0.0) return 0.0;
  return std::max(trace_distance * std::log(d2 / trace_distance), 0.0);
}

double wavepacket_distance_bound(double max_gap, double half_width) {
  require(max_gap > 0.0 && half_width > 0.0, ErrorKind::InvalidParameters, "domain error");
  return std::sqrt(max_gap / half_width);
}

}  // namespace qwork::thermo
