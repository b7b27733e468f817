#include <CLI11.hpp>

#include "qwork/cli.hpp"

namespace qwork::cli {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameters:
    case ErrorKind::DimensionMismatch:
      return 2;
    case ErrorKind::Validation:
      return 3;
    case ErrorKind::DimensionCap:
      return 4;
  }
  return 3;
}

std::vector<std::string> config_file_args(const std::filesystem::path& path) {
  require(std::filesystem::exists(path), ErrorKind::InvalidParameters, "config file not found: " + path.string());
  CLI::ConfigINI ini;
  std::vector<std::string> out;
  for (const CLI::ConfigItem& item : ini.from_file(path.string())) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    require(item.parents.empty(), ErrorKind::InvalidParameters, "config file must be flat: " + item.fullname());
    out.push_back("--" + item.name);
    std::string joined;
    for (const std::string& v : item.inputs) joined += (joined.empty() ? "" : ",") + v;
    out.push_back(joined);
  }
  return out;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::optional<std::string> file;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config") {
      require(k + 1 < args.size(), ErrorKind::InvalidParameters, "--config needs a file");
      file = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      file = args[k].substr(9);
    } else {
      rest.push_back(args[k]);
    }
  }
  if (!file || rest.empty()) return rest;
  std::vector<std::string> out{rest.front()};
  for (std::string& a : config_file_args(*file)) out.push_back(std::move(a));
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

}  // namespace qwork::cli
