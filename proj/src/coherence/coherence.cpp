#include "qwork/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "qwork/error.hpp"
#include "qwork/protocol.hpp"

namespace qwork::coherence {
namespace {

std::size_t power(std::size_t d, int n, std::size_t cap) {
  std::size_t out = 1;
  for (int k = 0; k < n; ++k) {
    if (out > cap / d) fail(ErrorKind::DimensionCap, "dimension cap exceeded");
    out *= d;
  }
  require(out <= cap, ErrorKind::DimensionCap, "dimension cap exceeded");
  return out;
}

double energy_tol(const Eigen::VectorXd& e, int n) {
  return kEnergyGroupTol * std::max(1.0, static_cast<double>(n) * e.cwiseAbs().maxCoeff());
}

DensityOperator normalized(qcore::Matrix m, double trace) {
  m /= trace;
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityOperator(std::move(m), qcore::Unchecked{});
}

std::vector<double> spectrum_desc(const DensityOperator& rho) {
  const Eigen::VectorXd ev = rho.eigenvalues();
  std::vector<double> v(ev.data(), ev.data() + ev.size());
  for (double& x : v) x = std::max(x, 0.0);
  std::sort(v.begin(), v.end(), std::greater<>());
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= total;
  return v;
}

}  // namespace

CoherentInput CoherentInput::make(DensityOperator rho, HermitianOperator h, int n_copies, std::size_t cap) {
  require(rho.dim() == h.dim(), ErrorKind::DimensionMismatch, "dimension mismatch");
  require(n_copies >= 1, ErrorKind::InvalidParameters, "copy count must be positive");
  power(rho.dim(), n_copies, cap);
  return {std::move(rho), std::move(h), n_copies};
}

double BlockDecomposition::entropy() const {
  double s = 0.0;
  for (const Block& b : blocks) {
    if (b.probability <= 0.0) continue;
    s += -b.probability * std::log(b.probability) + b.probability * qcore::von_neumann_entropy(b.state);
  }
  return s;
}

std::vector<double> BlockDecomposition::probabilities() const {
  std::vector<double> q;
  for (const Block& b : blocks) q.push_back(b.probability);
  return q;
}

EnergyBasis energy_basis(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<qcore::Matrix> solver(h.matrix());
  return {solver.eigenvalues(), solver.eigenvectors()};
}

DensityOperator dephase(const DensityOperator& rho, const HermitianOperator& h) {
  require(rho.dim() == h.dim(), ErrorKind::DimensionMismatch, "dimension mismatch");
  const EnergyBasis eb = energy_basis(h);
  qcore::Matrix r = eb.vectors.adjoint() * rho.matrix() * eb.vectors;
  const double tol = energy_tol(eb.energies, 1);
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      if (std::abs(eb.energies(i) - eb.energies(j)) > tol) r(i, j) = 0.0;
    }
  }
  qcore::Matrix out = eb.vectors * r * eb.vectors.adjoint();
  return normalized(std::move(out), 1.0);
}

BlockDecomposition collective_dephase(const CoherentInput& input) {
  const std::size_t d = input.rho.dim();
  const int n = input.n_copies;
  require(input.h.dim() == d, ErrorKind::DimensionMismatch, "dimension mismatch");
  const std::size_t total = power(d, n, qcore::kDefaultDimensionCap);

  const EnergyBasis eb = energy_basis(input.h);
  const qcore::Matrix r = eb.vectors.adjoint() * input.rho.matrix() * eb.vectors;

  // digits[s * n + m] is the level of copy m in product string s.
  std::vector<std::size_t> digits(total * static_cast<std::size_t>(n));
  std::vector<double> energy(total, 0.0);
  for (std::size_t s = 0; s < total; ++s) {
    std::size_t rest = s;
    for (int m = n - 1; m >= 0; --m) {
      const std::size_t level = rest % d;
      rest /= d;
      digits[s * n + m] = level;
      energy[s] += eb.energies(static_cast<Eigen::Index>(level));
    }
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return energy[a] < energy[b]; });

  const double tol = energy_tol(eb.energies, n);
  BlockDecomposition out;
  out.single_dim = d;
  out.copies = n;
  std::size_t storage = 0;
  for (std::size_t start = 0; start < total;) {
    std::size_t end = start + 1;
    while (end < total && energy[order[end]] - energy[order[start]] <= tol) ++end;
    Block b;
    b.members.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(b.members.begin(), b.members.end());
    b.rank = b.members.size();
    storage += b.rank * b.rank;
    require(storage <= kBlockStorageCap, ErrorKind::DimensionCap, "dimension cap exceeded");

    double e_sum = 0.0;
    for (std::size_t s : b.members) e_sum += energy[s];
    b.energy = e_sum / static_cast<double>(b.rank);

    qcore::Matrix m(static_cast<Eigen::Index>(b.rank), static_cast<Eigen::Index>(b.rank));
    for (std::size_t a = 0; a < b.rank; ++a) {
      for (std::size_t c = 0; c < b.rank; ++c) {
        qcore::Complex v = 1.0;
        const std::size_t* da = &digits[b.members[a] * n];
        const std::size_t* dc = &digits[b.members[c] * n];
        for (int k = 0; k < n; ++k) v *= r(static_cast<Eigen::Index>(da[k]), static_cast<Eigen::Index>(dc[k]));
        m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = v;
      }
    }
    b.probability = std::max(m.trace().real(), 0.0);
    b.state = b.probability > 0.0 ? normalized(std::move(m), b.probability) : DensityOperator::maximally_mixed(b.rank);
    out.blocks.push_back(std::move(b));
    start = end;
  }
  return out;
}

DephasingEntropy dephasing_entropy_increase(const CoherentInput& input) {
  const BlockDecomposition blocks = collective_dephase(input);
  double ds = blocks.entropy() - input.n_copies * qcore::von_neumann_entropy(input.rho);
  if (ds < 0.0 && ds > -1e-12) ds = 0.0;
  const double d = static_cast<double>(input.rho.dim());
  return {ds, (d - 1.0) * std::log(input.n_copies + 1.0)};
}

AncillaCertificate verify_dephasing_with_ancilla(const CoherentInput& input, std::size_t max_dim) {
  const BlockDecomposition blocks = collective_dephase(input);
  const std::size_t d = input.rho.dim();
  const int n = input.n_copies;
  const std::size_t dim_s = power(d, n, qcore::kDefaultDimensionCap);
  const std::size_t k_levels = blocks.blocks.size();
  require(dim_s * k_levels <= max_dim, ErrorKind::DimensionCap, "dimension cap exceeded");

  // rho^{(x)n} in the product energy basis.
  const EnergyBasis eb = energy_basis(input.h);
  const qcore::Matrix r = eb.vectors.adjoint() * input.rho.matrix() * eb.vectors;
  qcore::Matrix rn = r;
  for (int k = 1; k < n; ++k) rn = qcore::kron(rn, r);

  std::vector<std::size_t> block_of(dim_s);
  for (std::size_t k = 0; k < k_levels; ++k) {
    for (std::size_t s : blocks.blocks[k].members) block_of[s] = k;
  }
  // V (rho (x) |0><0|) V^dagger: string s carries the ancilla to |k(s)>.
  const auto dim = static_cast<Eigen::Index>(dim_s * k_levels);
  qcore::Matrix joint = qcore::Matrix::Zero(dim, dim);
  for (std::size_t s = 0; s < dim_s; ++s) {
    for (std::size_t t = 0; t < dim_s; ++t) {
      joint(static_cast<Eigen::Index>(s * k_levels + block_of[s]), static_cast<Eigen::Index>(t * k_levels + block_of[t])) =
          rn(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t));
    }
  }
  const DensityOperator rho_sa(std::move(joint), qcore::Unchecked{});
  const std::size_t dims[] = {dim_s, k_levels};
  const std::size_t keep_s[] = {0};
  const std::size_t keep_a[] = {1};
  const DensityOperator rho_s = qcore::partial_trace(rho_sa, dims, keep_s);
  const DensityOperator rho_a = qcore::partial_trace(rho_sa, dims, keep_a);

  AncillaCertificate c;
  c.joint_entropy = qcore::von_neumann_entropy(rho_sa);
  c.system_entropy = qcore::von_neumann_entropy(rho_s);
  c.ancilla_entropy = qcore::von_neumann_entropy(rho_a);
  c.n_single_entropy = n * qcore::von_neumann_entropy(input.rho);
  c.ancilla_levels = k_levels;
  c.log_multisets = std::lgamma(n + static_cast<double>(d)) - std::lgamma(n + 1.0) - std::lgamma(static_cast<double>(d));
  c.bound = (static_cast<double>(d) - 1.0) * std::log(n + 1.0);
  const double eps = 1e-9;
  c.holds = std::abs(c.joint_entropy - c.n_single_entropy) <= eps &&
            std::abs(c.system_entropy - blocks.entropy()) <= eps &&
            c.system_entropy - c.joint_entropy <= c.ancilla_entropy + eps &&
            c.ancilla_entropy <= std::log(static_cast<double>(k_levels)) + eps &&
            std::log(static_cast<double>(k_levels)) <= c.log_multisets + eps && c.log_multisets <= c.bound + eps;
  return c;
}

double block_expansion_work(const BlockDecomposition& blocks, const BlockDecomposition& target,
                            const ThermalContext& ctx) {
  require(blocks.blocks.size() == target.blocks.size(), ErrorKind::InvalidParameters, "incompatible decomposition");
  double w = 0.0;
  for (std::size_t k = 0; k < blocks.blocks.size(); ++k) {
    const Block& a = blocks.blocks[k];
    const Block& b = target.blocks[k];
    const double scale = std::max(1.0, std::abs(a.energy));
    require(a.rank == b.rank && std::abs(a.energy - b.energy) <= kEnergyGroupTol * scale &&
                std::abs(a.probability - b.probability) <= 1e-10,
            ErrorKind::InvalidParameters, "incompatible decomposition");
    if (a.probability <= 0.0) continue;
    w += a.probability * (qcore::von_neumann_entropy(b.state) - qcore::von_neumann_entropy(a.state));
  }
  return ctx.temperature() * w;
}

SimulatedExpansion simulate_block_expansion(const BlockDecomposition& blocks, const BlockDecomposition& target,
                                            const ThermalContext& ctx, std::int64_t steps_per_segment) {
  require(steps_per_segment >= 1, ErrorKind::InvalidParameters, "empty schedule");
  block_expansion_work(blocks, target, ctx);  // compatibility check
  SimulatedExpansion out;
  protocol::LedgerOptions options;
  options.record_probs = false;
  for (std::size_t k = 0; k < blocks.blocks.size(); ++k) {
    const Block& a = blocks.blocks[k];
    double w = 0.0;
    if (a.probability > 0.0 && a.rank > 1) {
      const std::vector<double> from = spectrum_desc(a.state);
      const std::vector<double> to = spectrum_desc(target.blocks[k].state);
      const std::vector<double> zeros(a.rank, 0.0);
      const auto rho = protocol::DiagonalState::make(from, zeros);
      const auto sigma = protocol::DiagonalState::make(to, zeros);
      auto path = protocol::two_phase_path(from, to);
      const auto segments = static_cast<std::int64_t>(path.size()) - 1;
      if (segments > 0) {
        const protocol::ProtocolTrace t = protocol::run_state_to_state(rho, sigma, ctx, segments * steps_per_segment,
                                                                       std::move(path), options);
        w = a.probability * t.work();
      }
    }
    out.block_work.push_back(w);
    out.work += w;
  }
  return out;
}

PerCopyWork per_copy_work(const CoherentInput& input, const ThermalContext& ctx) {
  const BlockDecomposition blocks = collective_dephase(input);
  const DensityOperator omega = dephase(input.rho, input.h);
  const BlockDecomposition target = collective_dephase({omega, input.h, input.n_copies});
  const DensityOperator tau = thermo::gibbs_state(input.h, ctx);
  const double n = input.n_copies;
  const double d = static_cast<double>(input.rho.dim());

  PerCopyWork out;
  out.expansion_work = block_expansion_work(blocks, target, ctx);
  out.diagonal_stage_work = thermo::free_energy(omega, input.h, ctx) - thermo::free_energy(tau, input.h, ctx);
  out.free_energy_target = thermo::free_energy(input.rho, input.h, ctx) - thermo::free_energy(tau, input.h, ctx);
  out.delta_s = blocks.entropy() - n * qcore::von_neumann_entropy(input.rho);
  out.work_per_copy = out.expansion_work / n + out.diagonal_stage_work;
  out.lower_bound = out.free_energy_target - ctx.temperature() * (d - 1.0) * std::log(n + 1.0) / n;
  return out;
}

double single_copy_optimum(const DensityOperator& rho, const HermitianOperator& h, const ThermalContext& ctx) {
  const DensityOperator tau = thermo::gibbs_state(h, ctx);
  return thermo::free_energy(dephase(rho, h), h, ctx) - thermo::free_energy(tau, h, ctx);
}

}  // namespace qwork::coherence
