#pragma once

#include <stdexcept>
#include <string>

namespace tickpred {

/// Failure category; the CLI maps these onto process exit codes.
enum class ErrorKind {
  Config,  // bad parameters, unknown columns, invalid schemes
  Data,    // unreadable, empty or degenerate input
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

}  // namespace tickpred
