#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "qwork/cli.hpp"
#include "qwork/coherence.hpp"
#include "qwork/io.hpp"
#include "qwork/protocol.hpp"
#include "qwork/verify.hpp"

namespace qwork::cli {
namespace {

using io::json;

json config_json(const RunConfig& c) {
  json j = {{"subcommand", c.subcommand},
            {"temp", c.temp},
            {"out_dir", c.out_dir},
            {"merge_tol", c.merge_tol},
            {"mass_floor", c.mass_floor},
            {"lattice_spacing", c.lattice_spacing},
            {"format", c.format}};
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  const std::string& s = c.subcommand;
  if (s == "qubit" || s == "oracle" || s == "sweep") {
    j["p"] = c.p;
    j["es"] = c.es;
  }
  if (s != "second-law") j["steps"] = c.steps;
  if (s == "qudit" || s == "state-to-state") {
    j["energies"] = c.energies;
    j["probs"] = c.probs;
    j["round_trip"] = c.round_trip;
    j["pivot"] = c.pivot;
  }
  if (s == "state-to-state") j["target"] = c.target;
  if (s == "coherence" || s == "sweep") {
    j["n"] = c.n;
    j["peq"] = c.peq;
    j["es"] = c.es;
  }
  if (s == "second-law") {
    j["bath_gaps"] = c.bath_gaps;
    j["trials"] = c.trials;
    j["two_cycles"] = c.two_cycles;
  }
  if (s == "sweep") {
    j["param"] = c.param;
    j["values"] = c.values;
  }
  return j;
}

protocol::LedgerOptions ledger_options(const RunConfig& c) {
  protocol::LedgerOptions o;
  o.merge_tol = c.merge_tol;
  o.mass_floor = c.mass_floor;
  require(c.mass_floor >= 0.0, ErrorKind::InvalidParameters, "mass floor must be nonnegative");
  require(c.lattice_spacing >= 0.0, ErrorKind::InvalidParameters, "lattice spacing must be nonnegative");
  if (c.lattice_spacing > 0.0) o.grid = weight::Grid::lattice(c.lattice_spacing);
  return o;
}

// Output sink: the summary goes to stdout (json) or the main series (csv);
// with --out-dir every artifact is also written there.
class Emitter {
 public:
  Emitter(const RunConfig& c, std::ostream& out) : c_(c), out_(out) {
    require(c.format == "json" || c.format == "csv", ErrorKind::InvalidParameters, "format must be csv or json");
  }

  void csv(const std::string& name, const std::string& content, bool primary) {
    if (primary) primary_csv_ = content;
    if (!c_.out_dir.empty()) io::write_file_atomic(std::filesystem::path(c_.out_dir) / name, content);
  }

  void finish(json summary) {
    summary["config"] = config_json(c_);
    const std::string text = summary.dump(2) + "\n";
    if (!c_.out_dir.empty()) io::write_file_atomic(std::filesystem::path(c_.out_dir) / "summary.json", text);
    if (c_.format == "csv" && !primary_csv_.empty()) {
      out_ << primary_csv_;
    } else {
      out_ << text;
    }
  }

 private:
  const RunConfig& c_;
  std::ostream& out_;
  std::string primary_csv_;
};

std::string trace_csv(const protocol::ProtocolTrace& t) {
  std::ostringstream os;
  io::write_trace_csv(os, t);
  return os.str();
}

std::string ledger_csv(const weight::WeightLedger& l) {
  std::ostringstream os;
  io::write_ledger_csv(os, l);
  return os.str();
}

json trace_json(const protocol::ProtocolTrace& t, double free_energy_delta) {
  return {{"work", t.work()},
          {"free_energy_delta", free_energy_delta},
          {"gap", free_energy_delta - t.work()},
          {"variance", weight::variance(t.final_ledger)},
          {"peaks", io::peaks_json(t)},
          {"final_probs", t.final_probs},
          {"steps", t.steps.size()},
          {"merge_tol", t.merge_tol},
          {"ledger", io::ledger_json(t.final_ledger)}};
}

int cmd_qubit(const RunConfig& c, std::ostream& out, bool isothermal) {
  const thermo::ThermalContext ctx(c.temp);
  const double p = isothermal ? 0.0 : c.p;
  const double es = isothermal ? 0.0 : c.es;
  const protocol::ProtocolTrace t = protocol::run_qubit_protocol({p, es, c.temp, c.steps}, ledger_options(c));
  const double p_eq = thermo::excitation_from_gap(es, ctx);
  const double reference = c.temp * thermo::relative_binary_entropy(p, p_eq);

  json s = trace_json(t, reference);
  s["p_eq"] = p_eq;
  s["reference_work"] = reference;
  json asym = json::array();
  const weight::WeightLedger a = protocol::asymptotic_weight_distribution(p, p_eq, c.temp);
  for (std::size_t k = 0; k < a.size(); ++k) asym.push_back({{"offset", a.offsets()[k]}, {"mass", a.masses()[k]}});
  s["asymptotic_peaks"] = asym;
  if (p > 0.0 && p < 1.0 && p != p_eq) {
    const protocol::ConditionalMeans m = protocol::finite_n_mean_corrections(p, p_eq, c.temp, c.steps);
    s["predicted_peak_means"] = {m.ground, m.excited};
    s["predicted_peak_variance"] = protocol::finite_n_variance(p, p_eq, c.temp, c.steps);
  }
  Emitter e(c, out);
  e.csv("trace.csv", trace_csv(t), true);
  e.csv("ledger.csv", ledger_csv(t.final_ledger), false);
  e.finish(std::move(s));
  return 0;
}

protocol::DiagonalState initial_state(const RunConfig& c) {
  require(!c.energies.empty(), ErrorKind::InvalidParameters, "--energies is required");
  require(c.probs.size() == c.energies.size(), ErrorKind::InvalidParameters, "--probs must match --energies");
  return protocol::DiagonalState::make(c.probs, c.energies);
}

int cmd_transition(const RunConfig& c, std::ostream& out, bool to_thermal) {
  const thermo::ThermalContext ctx(c.temp);
  const protocol::DiagonalState rho = initial_state(c);
  const protocol::DiagonalState sigma =
      to_thermal ? protocol::thermal_state(c.energies, ctx) : protocol::DiagonalState::make(c.target, c.energies);
  require(sigma.dim() == rho.dim(), ErrorKind::InvalidParameters, "--target must match --energies");
  const protocol::LedgerOptions opt = ledger_options(c);

  auto path = protocol::two_phase_path(rho.probs, sigma.probs, c.pivot);
  const protocol::ProtocolTrace t = protocol::run_state_to_state(rho, sigma, ctx, c.steps, path, opt);
  const double df = protocol::free_energy(rho, ctx) - protocol::free_energy(sigma, ctx);
  json s = trace_json(t, df);
  s["path"] = path;
  s["target_probs"] = sigma.probs;
  if (c.round_trip) {
    const protocol::DiagonalState back = protocol::DiagonalState::make(t.final_probs, c.energies);
    const protocol::ProtocolTrace r = protocol::run_state_to_state(
        back, rho, ctx, c.steps, protocol::two_phase_path(back.probs, rho.probs, c.pivot), opt);
    s["reverse_work"] = r.work();
    s["net_work"] = t.work() + r.work();
  }
  Emitter e(c, out);
  e.csv("trace.csv", trace_csv(t), true);
  e.csv("ledger.csv", ledger_csv(t.final_ledger), false);
  e.finish(std::move(s));
  return 0;
}

int cmd_coherence(const RunConfig& c, std::ostream& out) {
  const thermo::ThermalContext ctx(c.temp);
  require(c.peq > 0.0 && c.peq < 1.0, ErrorKind::InvalidParameters, "--peq must lie in (0,1)");
  require(c.es != 0.0, ErrorKind::InvalidParameters, "--es must be nonzero so copies split by excitation number");
  qcore::Vector psi(2);
  psi << std::sqrt(1.0 - c.peq), std::sqrt(c.peq);
  const double es[] = {0.0, c.es};
  const auto input = coherence::CoherentInput::make(qcore::DensityOperator::pure(psi),
                                                    qcore::HermitianOperator::diagonal(es), c.n);
  const coherence::BlockDecomposition blocks = coherence::collective_dephase(input);
  const auto omega = coherence::dephase(input.rho, input.h);
  const coherence::BlockDecomposition target = coherence::collective_dephase({omega, input.h, c.n});
  const double work = coherence::block_expansion_work(blocks, target, ctx);
  const coherence::SimulatedExpansion sim = coherence::simulate_block_expansion(blocks, target, ctx, c.steps);
  const coherence::DephasingEntropy ds = coherence::dephasing_entropy_increase(input);
  const coherence::PerCopyWork pc = coherence::per_copy_work(input, ctx);

  json s = {{"n", c.n},
            {"d", 2},
            {"work", work},
            {"simulated_work", sim.work},
            {"blocks", io::blocks_json(blocks)},
            {"delta_S", ds.delta_s},
            {"bound", ds.bound},
            {"diagonal_stage_work", pc.diagonal_stage_work},
            {"work_per_copy", pc.work_per_copy},
            {"lower_bound", pc.lower_bound},
            {"free_energy_target", pc.free_energy_target},
            {"single_copy_optimum", coherence::single_copy_optimum(input.rho, input.h, ctx)}};
  std::ostringstream csv;
  csv << "energy,rank,probability,entropy\n";
  for (const auto& b : blocks.blocks) {
    csv << io::format_real(b.energy) << ',' << b.rank << ',' << io::format_real(b.probability) << ','
        << io::format_real(qcore::von_neumann_entropy(b.state)) << '\n';
  }
  Emitter e(c, out);
  e.csv("blocks.csv", csv.str(), true);
  e.finish(std::move(s));
  return 0;
}

int cmd_second_law(const RunConfig& c, std::ostream& out) {
  require(c.seed.has_value(), ErrorKind::InvalidParameters, "--seed is required");
  const thermo::ThermalContext ctx(c.temp);
  std::vector<std::vector<double>> spectra;
  for (double g : c.bath_gaps) spectra.push_back({0.0, g});
  verify::SamplerOptions opt;
  opt.trials = c.trials;
  opt.seed = *c.seed;
  opt.two_cycles_only = c.two_cycles;
  const verify::SamplerReport r = verify::second_law_sampler(spectra, ctx, opt);
  const verify::VerificationReport rep{"second_law", r.trials, r.seed, std::max(r.max_work, 0.0), r.max_work <= 1e-12};
  json s = io::report_json(rep);
  s["max_work"] = r.max_work;
  s["argmax_trial"] = r.argmax_trial;
  Emitter e(c, out);
  e.finish(std::move(s));
  return rep.pass ? 0 : 3;
}

int cmd_oracle(const RunConfig& c, std::ostream& out) {
  const thermo::ThermalContext ctx(c.temp);
  require(c.steps >= 1 && c.steps <= 4, ErrorKind::InvalidParameters, "oracle runs take 1 to 4 steps");
  require(c.p >= 0.0 && c.p <= 1.0, ErrorKind::InvalidParameters, "p must lie in [0,1]");
  const double spacing = c.lattice_spacing > 0.0 ? c.lattice_spacing : 1e-4;
  const double p_eq = thermo::excitation_from_gap(c.es, ctx);
  const std::vector<double> energies{0.0, c.es};

  RunConfig engine_cfg = c;
  engine_cfg.lattice_spacing = 0.0;
  protocol::LedgerOptions opt = ledger_options(engine_cfg);
  const protocol::ProtocolTrace t = protocol::run_qubit_protocol({c.p, c.es, c.temp, c.steps}, opt);

  verify::OracleConfig oc;
  oc.system_energies = energies;
  oc.rho_s = qcore::DensityOperator::diagonal(std::vector<double>{1.0 - c.p, c.p}).matrix();
  oc.schedule = protocol::qubit_schedule(c.p, p_eq, c.steps, ctx);
  oc.weight = verify::TruncatedWeight::make(spacing, verify::window_half_width(energies, oc.schedule, spacing, 0, ctx));
  const verify::OracleResult r = verify::oracle_run(oc, ctx);

  const double bound = weight::discretization_error_bound(spacing, c.steps, c.p, p_eq);
  const double diff = std::abs(r.work - t.work());
  const bool pass = diff <= bound + 1e-9;
  json s = {{"oracle_work", r.work},
            {"engine_work", t.work()},
            {"difference", diff},
            {"bound", bound},
            {"dimension", r.dimension},
            {"epsilons", r.epsilons},
            {"pass", pass}};
  Emitter e(c, out);
  e.finish(std::move(s));
  return pass ? 0 : 3;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
  require(!c.values.empty(), ErrorKind::InvalidParameters, "--values is required");
  const thermo::ThermalContext ctx(c.temp);
  std::ostringstream csv;
  csv << "param,work,reference,abs_gap\n";
  json rows = json::array();
  for (double v : c.values) {
    require(v >= 1.0 && v == std::floor(v), ErrorKind::InvalidParameters, "sweep values must be positive integers");
    double work = 0.0;
    double reference = 0.0;
    if (c.param == "steps") {
      const protocol::ProtocolTrace t =
          protocol::run_qubit_protocol({c.p, c.es, c.temp, static_cast<std::int64_t>(v)}, ledger_options(c));
      work = t.work();
      reference = c.temp * thermo::relative_binary_entropy(c.p, thermo::excitation_from_gap(c.es, ctx));
    } else if (c.param == "n") {
      require(c.peq > 0.0 && c.peq < 1.0, ErrorKind::InvalidParameters, "--peq must lie in (0,1)");
      qcore::Vector psi(2);
      psi << std::sqrt(1.0 - c.peq), std::sqrt(c.peq);
      const double es[] = {0.0, c.es};
      const auto input = coherence::CoherentInput::make(qcore::DensityOperator::pure(psi),
                                                        qcore::HermitianOperator::diagonal(es), static_cast<int>(v));
      const coherence::PerCopyWork pc = coherence::per_copy_work(input, ctx);
      work = pc.work_per_copy;
      reference = pc.free_energy_target;
    } else {
      fail(ErrorKind::InvalidParameters, "--param must be steps or n");
    }
    const double gap = std::abs(reference - work);
    csv << io::format_real(v) << ',' << io::format_real(work) << ',' << io::format_real(reference) << ','
        << io::format_real(gap) << '\n';
    rows.push_back({{"param", v}, {"work", work}, {"reference", reference}, {"abs_gap", gap}});
  }
  Emitter e(c, out);
  e.csv("sweep.csv", csv.str(), true);
  e.finish({{"rows", rows}});
  return 0;
}

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--temp", c.temp, "bath temperature (k_B = 1)");
  sub->add_option("--seed", c.seed, "master seed");
  sub->add_option("--out-dir", c.out_dir, "directory for CSV/JSON artifacts");
  sub->add_option("--merge-tol", c.merge_tol, "ledger merge tolerance (default 1e-9 T)");
  sub->add_option("--mass-floor", c.mass_floor, "ledger points lighter than this are folded into neighbours");
  sub->add_option("--lattice-spacing", c.lattice_spacing, "weight ladder spacing; 0 keeps a continuous weight");
  sub->add_option("--format", c.format, "stdout format")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"qwork: work extraction simulator and verifier"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* qubit = app.add_subcommand("qubit", "diagonal qubit protocol");
  auto* iso = app.add_subcommand("isothermal", "degenerate qubit expansion from a pure level");
  auto* qudit = app.add_subcommand("qudit", "diagonal qudit to its thermal state");
  auto* s2s = app.add_subcommand("state-to-state", "diagonal state to diagonal state");
  auto* coh = app.add_subcommand("coherence", "n copies of a coherent qubit");
  auto* law = app.add_subcommand("second-law", "random permutations on thermal qubits");
  auto* orc = app.add_subcommand("oracle", "classical engine against the full Hilbert-space oracle");
  auto* sweep = app.add_subcommand("sweep", "convergence sweep over steps or copies");
  for (auto* s : app.get_subcommands({})) {
    s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    add_common(s, c);
  }

  for (auto* s : {qubit, orc, sweep}) {
    s->add_option("--p", c.p, "initial excited population");
    s->add_option("--es", c.es, "system gap");
  }
  for (auto* s : {qubit, iso, qudit, s2s, orc}) s->add_option("--steps", c.steps, "number of bath qubits");
  coh->add_option("--steps", c.steps, "simulated steps per level pair inside each block");
  for (auto* s : {qudit, s2s}) {
    s->add_option("--energies", c.energies, "level energies")->delimiter(',');
    s->add_option("--probs", c.probs, "initial probabilities")->delimiter(',');
    s->add_option("--pivot", c.pivot, "level collecting excess probability first");
    s->add_option("--round-trip", c.round_trip, "also run back to the initial state");
  }
  s2s->add_option("--target", c.target, "target probabilities")->delimiter(',');
  for (auto* s : {coh, sweep}) {
    s->add_option("--n", c.n, "number of copies");
    s->add_option("--peq", c.peq, "excited population of the coherent input");
  }
  coh->add_option("--es", c.es, "system gap");
  law->add_option("--bath-gaps", c.bath_gaps, "gaps of the thermal qubits")->delimiter(',');
  law->add_option("--trials", c.trials, "number of sampled permutations");
  law->add_option("--two-cycles", c.two_cycles, "sample fixed-point-free pairings only");
  sweep->add_option("--param", c.param, "steps or n")->check(CLI::IsMember({"steps", "n"}));
  sweep->add_option("--values", c.values, "grid values")->delimiter(',');

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    c.subcommand = sub->get_name();
    if (sub == qubit) return cmd_qubit(c, out, false);
    if (sub == iso) return cmd_qubit(c, out, true);
    if (sub == qudit) return cmd_transition(c, out, true);
    if (sub == s2s) return cmd_transition(c, out, false);
    if (sub == coh) return cmd_coherence(c, out);
    if (sub == law) return cmd_second_law(c, out);
    if (sub == orc) return cmd_oracle(c, out);
    return cmd_sweep(c, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace qwork::cli
