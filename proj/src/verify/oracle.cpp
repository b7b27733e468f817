#include <cmath>
#include <numeric>

#include "qwork/error.hpp"
#include "qwork/verify.hpp"
#include "qwork/weight.hpp"

namespace qwork::verify {
namespace {

using Triplet = Eigen::Triplet<qcore::Complex>;

std::vector<std::int64_t> lattice_units(const PermutationProtocol& protocol, double spacing) {
  std::vector<std::int64_t> units(protocol.dim());
  for (std::size_t j = 0; j < protocol.dim(); ++j) {
    const double u = protocol.translation(j) / spacing;
    const double whole = std::nearbyint(u);
    require(std::abs(u - whole) <= 1e-6, ErrorKind::InvalidParameters,
            "translation is not a multiple of the weight spacing");
    units[j] = static_cast<std::int64_t>(whole);
  }
  return units;
}

std::size_t checked_product(std::size_t a, std::size_t b, std::size_t cap) {
  if (a != 0 && b > cap / a) fail(ErrorKind::DimensionCap, "dimension cap exceeded");
  require(a * b <= cap, ErrorKind::DimensionCap, "dimension cap exceeded");
  return a * b;
}

// Weight energy tr(H_w rho) with the weight as the last tensor factor.
double weight_energy(const Eigen::VectorXd& diag, const TruncatedWeight& w) {
  const std::size_t l = w.levels();
  double e = 0.0;
  for (Eigen::Index g = 0; g < diag.size(); ++g) e += diag(g) * w.energy(static_cast<std::size_t>(g) % l);
  return e;
}

Eigen::VectorXd real_diagonal(const qcore::SparseMatrix& rho) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(rho.rows());
  for (Eigen::Index c = 0; c < rho.outerSize(); ++c) {
    for (qcore::SparseMatrix::InnerIterator it(rho, c); it; ++it) {
      if (it.row() == it.col()) d(it.row()) = it.value().real();
    }
  }
  return d;
}

}  // namespace

PermutationProtocol PermutationProtocol::make(std::vector<double> energies, std::vector<std::size_t> perm) {
  require(energies.size() == perm.size(), ErrorKind::DimensionMismatch, "dimension mismatch");
  std::vector<bool> hit(perm.size(), false);
  for (std::size_t p : perm) {
    require(p < perm.size() && !hit[p], ErrorKind::InvalidParameters, "not a permutation");
    hit[p] = true;
  }
  for (double e : energies) require(std::isfinite(e), ErrorKind::InvalidParameters, "non-finite energy");
  return {std::move(energies), std::move(perm)};
}

PermutationProtocol identity_protocol(std::vector<double> energies) {
  std::vector<std::size_t> perm(energies.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  return PermutationProtocol::make(std::move(energies), std::move(perm));
}

PermutationProtocol swap_protocol(std::span<const double> system_energies, std::size_t level_low,
                                  std::size_t level_high, double bath_gap) {
  const std::size_t d = system_energies.size();
  require(level_low < d && level_high < d && level_low != level_high, ErrorKind::InvalidParameters,
          "swap levels out of range");
  std::vector<double> energies(2 * d);
  for (std::size_t s = 0; s < d; ++s) {
    energies[2 * s] = system_energies[s];
    energies[2 * s + 1] = system_energies[s] + bath_gap;
  }
  std::vector<std::size_t> perm(2 * d);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  perm[2 * level_high] = 2 * level_low + 1;
  perm[2 * level_low + 1] = 2 * level_high;
  return PermutationProtocol::make(std::move(energies), std::move(perm));
}

TruncatedWeight TruncatedWeight::make(double spacing, std::int64_t half_width) {
  require(std::isfinite(spacing) && spacing > 0.0, ErrorKind::InvalidParameters, "weight spacing must be positive");
  require(half_width >= 0, ErrorKind::InvalidParameters, "weight half-width must be nonnegative");
  return {spacing, half_width};
}

BuiltUnitary build_unitary(const PermutationProtocol& protocol, const TruncatedWeight& weight) {
  BuiltUnitary out;
  out.units = lattice_units(protocol, weight.spacing);
  const std::size_t l = weight.levels();
  const std::size_t dim = checked_product(protocol.dim(), l, qcore::kDefaultDimensionCap);
  const auto li = static_cast<std::int64_t>(l);
  std::vector<Triplet> trip;
  trip.reserve(dim);
  for (std::size_t j = 0; j < protocol.dim(); ++j) {
    for (std::int64_t w = 0; w < li; ++w) {
      std::int64_t w2 = w + out.units[j];
      const std::size_t col = j * l + static_cast<std::size_t>(w);
      if (w2 < 0 || w2 >= li) {
        out.boundary_columns.push_back(col);
        w2 = ((w2 % li) + li) % li;
      }
      trip.emplace_back(static_cast<Eigen::Index>(protocol.perm[j] * l + static_cast<std::size_t>(w2)),
                        static_cast<Eigen::Index>(col), 1.0);
    }
  }
  out.u.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  out.u.setFromTriplets(trip.begin(), trip.end());
  return out;
}

double work_formula(const PermutationProtocol& protocol, std::span<const double> diag_sb) {
  require(diag_sb.size() == protocol.dim(), ErrorKind::DimensionMismatch, "dimension mismatch");
  double w = 0.0;
  for (std::size_t j = 0; j < protocol.dim(); ++j) w += protocol.translation(j) * diag_sb[j];
  return w;
}

double work_formula(const PermutationProtocol& protocol, const qcore::DensityOperator& rho_sb) {
  const std::vector<double> diag = rho_sb.diagonal_probs();
  return work_formula(protocol, diag);
}

std::int64_t window_half_width(std::span<const double> system_energies, std::span<const protocol::SwapStep> schedule,
                               double spacing, std::int64_t initial_level, const ThermalContext&) {
  require(spacing > 0.0, ErrorKind::InvalidParameters, "weight spacing must be positive");
  std::int64_t reach = 0;
  for (const protocol::SwapStep& s : schedule) {
    require(s.level_low < system_energies.size() && s.level_high < system_energies.size(),
            ErrorKind::InvalidParameters, "swap levels out of range");
    const double e_pair = system_energies[s.level_high] - system_energies[s.level_low];
    reach += std::abs(weight::snap_to_lattice(e_pair - s.bath_gap, spacing).m);
  }
  return 2 * (reach + std::abs(initial_level)) + 1;
}

OracleResult oracle_run(const OracleConfig& cfg, const ThermalContext& ctx) {
  const std::size_t d = cfg.system_energies.size();
  require(d >= 1, ErrorKind::InvalidParameters, "empty system");
  require(static_cast<std::size_t>(cfg.rho_s.rows()) == d, ErrorKind::DimensionMismatch, "dimension mismatch");
  const qcore::DensityOperator rho_s(cfg.rho_s);
  const TruncatedWeight& wt = cfg.weight;
  const std::size_t l = wt.levels();
  const std::size_t n = cfg.schedule.size();
  require(n < 40, ErrorKind::DimensionCap, "dimension cap exceeded");
  const std::size_t baths = std::size_t{1} << n;
  const std::size_t total = checked_product(checked_product(d, baths, cfg.cap), l, cfg.cap);

  OracleResult out;
  out.dimension = total;
  std::vector<PermutationProtocol> steps;
  for (const protocol::SwapStep& s : cfg.schedule) {
    require(s.level_low < d && s.level_high < d && s.level_low != s.level_high, ErrorKind::InvalidParameters,
            "swap levels out of range");
    const double e_pair = cfg.system_energies[s.level_high] - cfg.system_energies[s.level_low];
    const weight::LatticeSnap snap = weight::snap_to_lattice(e_pair - s.bath_gap, wt.spacing);
    const double gap = e_pair - static_cast<double>(snap.m) * wt.spacing;
    out.bath_gaps.push_back(gap);
    out.bath_excitations.push_back(thermo::excitation_from_gap(gap, ctx));
    out.epsilons.push_back(snap.epsilon);
    steps.push_back(swap_protocol(cfg.system_energies, s.level_low, s.level_high, gap));
  }

  // rho_S (x) tau_B1 (x) ... (x) tau_BN (x) rho_W
  qcore::SparseMatrix rho = rho_s.matrix().sparseView();
  for (double r : out.bath_excitations) {
    qcore::SparseMatrix tau(2, 2);
    tau.insert(0, 0) = 1.0 - r;
    tau.insert(1, 1) = r;
    rho = qcore::kron(rho, tau, cfg.cap);
  }
  qcore::SparseMatrix w;
  if (cfg.weight_state) {
    require(static_cast<std::size_t>(cfg.weight_state->rows()) == l, ErrorKind::DimensionMismatch,
            "dimension mismatch");
    w = qcore::DensityOperator(*cfg.weight_state).matrix().sparseView();
  } else {
    require(std::abs(cfg.initial_level) <= wt.half_width, ErrorKind::InvalidParameters, "weight window too small");
    w.resize(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l));
    const auto i0 = static_cast<Eigen::Index>(wt.index_of(cfg.initial_level));
    w.insert(i0, i0) = 1.0;
  }
  rho = qcore::kron(rho, w, cfg.cap);

  Eigen::VectorXd diag = real_diagonal(rho);
  double energy = weight_energy(diag, wt);
  const double e_initial = energy;
  const auto li = static_cast<std::int64_t>(l);

  for (std::size_t k = 0; k < n; ++k) {
    const PermutationProtocol& pp = steps[k];
    const std::vector<std::int64_t> units = lattice_units(pp, wt.spacing);
    const std::size_t bit = n - 1 - k;  // first bath qubit is the most significant
    std::vector<Triplet> trip;
    trip.reserve(total);
    for (std::size_t g = 0; g < total; ++g) {
      const auto wi = static_cast<std::int64_t>(g % l);
      const std::size_t rest = g / l;
      const std::size_t bits = rest % baths;
      const std::size_t s = rest / baths;
      const std::size_t j = 2 * s + ((bits >> bit) & 1u);
      const std::size_t t = pp.perm[j];
      const std::size_t bits2 = (bits & ~(std::size_t{1} << bit)) | ((t & 1u) << bit);
      std::int64_t w2 = wi + units[j];
      if (w2 < 0 || w2 >= li) {
        require(!(diag(static_cast<Eigen::Index>(g)) > 0.0), ErrorKind::InvalidParameters, "weight window too small");
        w2 = ((w2 % li) + li) % li;
      }
      const std::size_t row = ((t / 2) * baths + bits2) * l + static_cast<std::size_t>(w2);
      trip.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(g), 1.0);
    }
    qcore::SparseMatrix u(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
    u.setFromTriplets(trip.begin(), trip.end());
    qcore::SparseMatrix tmp = u * rho;
    rho = tmp * u.adjoint();
    diag = real_diagonal(rho);
    const double e_next = weight_energy(diag, wt);
    out.step_work.push_back(e_next - energy);
    energy = e_next;
  }
  out.work = energy - e_initial;

  out.weight_populations.assign(l, 0.0);
  out.bath_excitations_after.assign(n, 0.0);
  for (std::size_t g = 0; g < total; ++g) {
    const double p = diag(static_cast<Eigen::Index>(g));
    out.weight_populations[g % l] += p;
    const std::size_t bits = (g / l) % baths;
    for (std::size_t k = 0; k < n; ++k) {
      if ((bits >> (n - 1 - k)) & 1u) out.bath_excitations_after[k] += p;
    }
  }
  std::vector<std::size_t> dims{d};
  for (std::size_t k = 0; k < n; ++k) dims.push_back(2);
  dims.push_back(l);
  const std::size_t keep[] = {0};
  out.system_state = qcore::partial_trace(rho, dims, keep);
  return out;
}

}  // namespace qwork::verify
