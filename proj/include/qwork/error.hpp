#pragma once

#include <stdexcept>
#include <string>

namespace qwork {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  InvalidParameters,  // domain errors, malformed inputs
  DimensionMismatch,
  DimensionCap,
  Validation,         // internal consistency check failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace qwork
