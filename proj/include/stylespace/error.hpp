#pragma once
// Exception hierarchy shared by every module. The CLI maps each kind onto a
// process exit code.

#include <stdexcept>
#include <string>

namespace stylespace {

enum class ErrorKind {
  config = 1,       // bad flags or config values
  missing_input = 2,  // missing file, cache miss, unreadable input
  computation = 3,  // precondition or numerical failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct InputError : Error {
  explicit InputError(const std::string& what)
      : Error(ErrorKind::missing_input, what) {}
};

// Malformed record in an input file. Reported as an input problem.
struct SchemaError : InputError {
  explicit SchemaError(const std::string& what) : InputError(what) {}
};

struct CacheMiss : InputError {
  explicit CacheMiss(const std::string& what) : InputError("cache miss: " + what) {}
};

struct ComputeError : Error {
  explicit ComputeError(const std::string& what)
      : Error(ErrorKind::computation, what) {}
};

[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& what) {
  switch (kind) {
    case ErrorKind::config:
      throw ConfigError(what);
    case ErrorKind::missing_input:
      throw InputError(what);
    case ErrorKind::computation:
      break;
  }
  throw ComputeError(what);
}

}  // namespace stylespace
