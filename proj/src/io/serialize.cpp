#include "qwork/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qwork/error.hpp"

namespace qwork::io {

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_ledger_csv(std::ostream& os, const weight::WeightLedger& ledger) {
  os << "offset,mass\n";
  for (std::size_t k = 0; k < ledger.size(); ++k) {
    os << format_real(ledger.offsets()[k]) << ',' << format_real(ledger.masses()[k]) << '\n';
  }
}

namespace {

double parse_real(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorKind::InvalidParameters,
          "malformed number '" + std::string(s) + "'");
  return v;
}

}  // namespace

weight::WeightLedger read_ledger_csv(std::istream& is, const weight::Grid& grid, double merge_tol) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)) && line == "offset,mass", ErrorKind::InvalidParameters,
          "missing ledger header");
  std::vector<weight::Point> pts;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, ErrorKind::InvalidParameters, "malformed ledger row");
    const std::string_view v(line);
    pts.push_back({parse_real(v.substr(0, comma)), parse_real(v.substr(comma + 1))});
  }
  double total = 0.0;
  for (const auto& p : pts) total += p.mass;
  return weight::WeightLedger::from_points(pts, grid, merge_tol, std::max(0.0, 1.0 - total));
}

void write_trace_csv(std::ostream& os, const protocol::ProtocolTrace& trace) {
  os << "k,r_k,E_B_k,work_increment,cumulative_work\n";
  for (const auto& s : trace.steps) {
    os << s.k << ',' << format_real(s.r) << ',' << format_real(s.bath_gap) << ',' << format_real(s.work_increment)
       << ',' << format_real(s.cumulative_work) << '\n';
  }
}

json ledger_json(const weight::WeightLedger& ledger) {
  return {{"points", ledger.size()},
          {"mean", weight::mean_energy(ledger)},
          {"variance", weight::variance(ledger)},
          {"truncated_mass", ledger.truncated_mass()},
          {"mode", ledger.mode() == weight::Mode::Lattice ? "lattice" : "continuous"}};
}

json peaks_json(const protocol::ProtocolTrace& trace) {
  json out = json::array();
  for (const auto& c : trace.conditional) {
    json row = {{"initial_level", c.initial_level}, {"probability", c.probability}};
    if (c.ledger) {
      row["mean"] = weight::mean_energy(*c.ledger);
      row["variance"] = weight::variance(*c.ledger);
      row["points"] = c.ledger->size();
    } else {
      row["mean"] = nullptr;
      row["variance"] = nullptr;
      row["points"] = 0;
    }
    out.push_back(std::move(row));
  }
  return out;
}

json blocks_json(const coherence::BlockDecomposition& blocks) {
  json out = json::array();
  for (const auto& b : blocks.blocks) {
    out.push_back({{"energy", b.energy},
                   {"rank", b.rank},
                   {"probability", b.probability},
                   {"entropy", qcore::von_neumann_entropy(b.state)}});
  }
  return out;
}

json report_json(const verify::VerificationReport& r) {
  return {{"test", r.test}, {"trials", r.trials}, {"seed", r.seed}, {"max_violation", r.max_violation}, {"pass", r.pass}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(f), ErrorKind::InvalidParameters, "cannot write " + tmp.string());
    f << content;
    f.flush();
    require(static_cast<bool>(f), ErrorKind::InvalidParameters, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qwork::io
