#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qwork/error.hpp"
#include "qwork/verify.hpp"

namespace qwork::verify {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) { return splitmix64(master + trial); }

PermutationProtocol random_protocol(std::vector<double> energies, const std::vector<std::vector<std::size_t>>& blocks,
                                    bool two_cycles_only, std::mt19937_64& rng) {
  const std::size_t dim = energies.size();
  std::vector<std::vector<std::size_t>> parts = blocks;
  if (parts.empty()) {
    parts.emplace_back(dim);
    std::iota(parts[0].begin(), parts[0].end(), std::size_t{0});
  }
  std::vector<std::size_t> perm(dim);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<bool> seen(dim, false);
  for (const auto& block : parts) {
    for (std::size_t i : block) {
      require(i < dim && !seen[i], ErrorKind::InvalidParameters, "blocks must partition the basis");
      seen[i] = true;
    }
    std::vector<std::size_t> img = block;
    std::shuffle(img.begin(), img.end(), rng);
    if (two_cycles_only) {
      for (std::size_t k = 0; k + 1 < img.size(); k += 2) {
        perm[img[k]] = img[k + 1];
        perm[img[k + 1]] = img[k];
      }
    } else {
      for (std::size_t k = 0; k < block.size(); ++k) perm[block[k]] = img[k];
    }
  }
  return PermutationProtocol::make(std::move(energies), std::move(perm));
}

SamplerReport second_law_sampler(const std::vector<std::vector<double>>& spectra, const ThermalContext& ctx,
                                 const SamplerOptions& options) {
  require(!spectra.empty(), ErrorKind::InvalidParameters, "no thermal subsystems");
  require(options.trials >= 1, ErrorKind::InvalidParameters, "trials must be positive");
  std::vector<double> energies{0.0};
  std::vector<double> probs{1.0};
  for (const std::vector<double>& levels : spectra) {
    const std::vector<double> g = thermo::gibbs_probabilities(levels, ctx);
    std::vector<double> e2;
    std::vector<double> p2;
    for (std::size_t a = 0; a < energies.size(); ++a) {
      for (std::size_t b = 0; b < levels.size(); ++b) {
        e2.push_back(energies[a] + levels[b]);
        p2.push_back(probs[a] * g[b]);
      }
    }
    require(e2.size() <= qcore::kDefaultDimensionCap, ErrorKind::DimensionCap, "dimension cap exceeded");
    energies = std::move(e2);
    probs = std::move(p2);
  }

  SamplerReport rep;
  rep.trials = options.trials;
  rep.seed = options.seed;
  rep.max_work = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < options.trials; ++t) {
    std::mt19937_64 rng(trial_seed(options.seed, t));
    const PermutationProtocol pp = random_protocol(energies, options.blocks, options.two_cycles_only, rng);
    const double w = work_formula(pp, probs);
    if (w > rep.max_work) {
      rep.max_work = w;
      rep.argmax_trial = t;
    }
  }
  return rep;
}

IndependenceReport engine_weight_independence(const protocol::QubitParams& params, protocol::LedgerOptions options,
                                              std::span<const double> offsets) {
  require(!offsets.empty(), ErrorKind::InvalidParameters, "no offsets");
  IndependenceReport rep;
  std::optional<protocol::ProtocolTrace> ref;
  for (double a : offsets) {
    require(std::isfinite(a), ErrorKind::InvalidParameters, "non-finite offset");
    options.initial_ledger = weight::WeightLedger::point(a);
    protocol::ProtocolTrace t = protocol::run_qubit_protocol(params, options);
    rep.offsets.push_back(a);
    rep.works.push_back(t.work());
    if (!ref) {
      ref = std::move(t);
      continue;
    }
    rep.max_work_deviation = std::max(rep.max_work_deviation, std::abs(t.work() - ref->work()));
    const weight::WeightLedger& x = t.final_ledger;
    const weight::WeightLedger& y = ref->final_ledger;
    if (x.size() != y.size()) {
      rep.max_shape_deviation = std::numeric_limits<double>::infinity();
      continue;
    }
    const double da = a - rep.offsets.front();
    for (std::size_t k = 0; k < x.size(); ++k) {
      rep.max_shape_deviation = std::max({rep.max_shape_deviation, std::abs((x.offsets()[k] - y.offsets()[k]) - da),
                                          std::abs(x.masses()[k] - y.masses()[k])});
    }
  }
  rep.pass = rep.max_work_deviation <= 1e-12 && rep.max_shape_deviation <= 1e-9;
  return rep;
}

IndependenceReport oracle_weight_independence(const OracleConfig& base, const ThermalContext& ctx,
                                              std::span<const std::int64_t> level_shifts) {
  require(!level_shifts.empty(), ErrorKind::InvalidParameters, "no offsets");
  IndependenceReport rep;
  std::optional<OracleResult> ref;
  std::int64_t ref_shift = 0;
  for (std::int64_t s : level_shifts) {
    OracleConfig cfg = base;
    cfg.initial_level = base.initial_level + s;
    OracleResult r = oracle_run(cfg, ctx);
    rep.offsets.push_back(static_cast<double>(s) * base.weight.spacing);
    rep.works.push_back(r.work);
    if (!ref) {
      ref = std::move(r);
      ref_shift = s;
      continue;
    }
    rep.max_work_deviation = std::max(rep.max_work_deviation, std::abs(r.work - ref->work));
    const auto l = static_cast<std::int64_t>(r.weight_populations.size());
    for (std::int64_t k = 0; k < l; ++k) {
      const std::int64_t k2 = k + (s - ref_shift);
      const double other = (k2 >= 0 && k2 < l) ? r.weight_populations[static_cast<std::size_t>(k2)] : 0.0;
      rep.max_shape_deviation =
          std::max(rep.max_shape_deviation, std::abs(other - ref->weight_populations[static_cast<std::size_t>(k)]));
    }
  }
  rep.pass = rep.max_work_deviation <= 1e-12 && rep.max_shape_deviation <= 1e-12;
  return rep;
}

ExpansionCheck expansion_check(double p, std::span<const double> dps, double system_gap, const ThermalContext& ctx) {
  require(p > 0.0 && p < 1.0, ErrorKind::InvalidParameters, "domain error");
  require(dps.size() >= 2, ErrorKind::InvalidParameters, "need at least two step sizes");
  const double t = ctx.temperature();
  const std::vector<double> energies{0.0, system_gap};
  const double f_p = thermo::free_energy(std::vector<double>{1.0 - p, p}, energies, ctx);
  const double first_slope = system_gap - t * thermo::binary_entropy_prime(p);

  ExpansionCheck out;
  for (double dp : dps) {
    require(dp > 0.0 && dp < p, ErrorKind::InvalidParameters, "step size outside (0, p)");
    const double r = p - dp;
    ExpansionRow row;
    row.dp = dp;
    row.delta_f = f_p - thermo::free_energy(std::vector<double>{1.0 - r, r}, energies, ctx);
    row.delta_e = (p - r) * (system_gap - thermo::gap_from_excitation(r, ctx));
    row.first_order = dp * first_slope;
    row.quad_f = (row.delta_f - row.first_order) / (dp * dp);
    row.quad_e = (row.delta_e - row.first_order) / (dp * dp);
    out.rows.push_back(row);
  }
  // Linear extrapolation of the quadratic coefficients to dp = 0 from the two smallest steps.
  std::vector<ExpansionRow> sorted = out.rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.dp < b.dp; });
  const ExpansionRow& a = sorted[0];
  const ExpansionRow& b = sorted[1];
  require(a.dp != b.dp, ErrorKind::InvalidParameters, "need at least two step sizes");
  out.quad_f = (b.dp * a.quad_f - a.dp * b.quad_f) / (b.dp - a.dp);
  out.quad_e = (b.dp * a.quad_e - a.dp * b.quad_e) / (b.dp - a.dp);
  out.ratio = out.quad_e / out.quad_f;
  out.quad_f_series = 0.5 * t * thermo::binary_entropy_double_prime(p);
  out.quad_e_series = t * thermo::binary_entropy_double_prime(p);
  return out;
}

}  // namespace qwork::verify
