#pragma once

#include <stdexcept>
#include <string>

namespace exitwalk {

// Process exit codes the CLI maps errors onto. Library code throws, the CLI
// translates; tests check both the type and the code.
enum class ErrorCode : int {
  config = 2,    // bad law spec, bad flags, unsupported request
  numeric = 3,   // non-convergence, residual over tolerance
  invariant = 4, // a mathematical identity that must hold exactly failed
  resource = 5,  // over the configured memory/size budget
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

private:
  ErrorCode code_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCode::config, w) {}
};

// Requesting a functional the law cannot supply (e.g. a mean-based tail
// functional of a law with no finite mean). A misuse of the API, so it maps
// onto the config exit code.
struct CapabilityError : ConfigError {
  explicit CapabilityError(const std::string& w) : ConfigError(w) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorCode::numeric, w) {}
};

struct ConvergenceError : NumericError {
  ConvergenceError(const std::string& w, double last_delta)
      : NumericError(w), last_delta(last_delta) {}
  double last_delta;
};

struct InvariantError : Error {
  explicit InvariantError(const std::string& w)
      : Error(ErrorCode::invariant, w) {}
};

struct ResourceError : Error {
  explicit ResourceError(const std::string& w)
      : Error(ErrorCode::resource, w) {}
};

} // namespace exitwalk
