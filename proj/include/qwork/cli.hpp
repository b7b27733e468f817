#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qwork/error.hpp"

namespace qwork::cli {

/// Every knob of every subcommand; unused fields keep their defaults.
struct RunConfig {
  std::string subcommand;
  // common
  double temp = 1.0;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  double merge_tol = -1.0;  // negative: 1e-9 * T
  double mass_floor = 1e-15;
  double lattice_spacing = 0.0;  // 0: continuous weight
  std::string format = "json";
  // protocols
  double p = 0.3;
  double es = 1.0;
  std::int64_t steps = 10000;
  std::vector<double> energies;
  std::vector<double> probs;
  std::vector<double> target;
  std::size_t pivot = 0;
  bool round_trip = false;
  // coherence
  int n = 2;
  double peq = 0.5;
  // verification
  std::vector<double> bath_gaps{1.0, 0.5, 0.25};
  std::size_t trials = 1000;
  bool two_cycles = false;
  // sweep
  std::string param = "steps";
  std::vector<double> values;
};

int exit_code(ErrorKind kind);

/// Parses a flat `key = value` file (blank lines and # comments allowed)
/// into `--key value` arguments.
std::vector<std::string> config_file_args(const std::filesystem::path& path);

/// Replaces `--config FILE` by the file's settings, placed right after the
/// subcommand so that flags given on the command line take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

/// Entry point behind the executable; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qwork::cli
