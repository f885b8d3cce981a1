#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace citetrend {

/// Process exit codes used by the command-line front-end.
enum class ExitCode : int {
  ok = 0,
  validation = 2,
  network = 3,
  data_integrity = 4,
};

/// Base of every error the library throws. Each kind maps to one exit code.
class Error : public std::runtime_error {
 public:
  Error(ExitCode code, std::string_view kind, const std::string& message)
      : std::runtime_error(message), code_(code), kind_(kind) {}

  ExitCode exit_code() const noexcept { return code_; }
  std::string_view kind() const noexcept { return kind_; }

 private:
  ExitCode code_;
  std::string_view kind_;
};

/// Bad user input: flags, config fields, precondition violations.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ExitCode::validation, "validation", message) {}
};

/// Mathematically undefined request (zero denominator, wrong arity, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message)
      : Error(ExitCode::validation, "domain", message) {}
};

/// Malformed input bytes: identifiers, XML, JSON records.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message)
      : Error(ExitCode::data_integrity, "parse", message) {}
};

/// Inconsistent data: duplicates, schema mismatch, missing snapshots, I/O.
class DataIntegrityError : public Error {
 public:
  explicit DataIntegrityError(const std::string& message)
      : Error(ExitCode::data_integrity, "data-integrity", message) {}
};

class NetworkError : public Error {
 public:
  explicit NetworkError(const std::string& message)
      : Error(ExitCode::network, "network", message) {}
};

/// Joins ids for error messages, eliding after `limit` entries.
inline std::string join_ids(const std::vector<std::string>& ids, std::size_t limit = 20) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < limit; ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  if (ids.size() > limit) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

}  // namespace citetrend
