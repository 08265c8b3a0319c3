#pragma once

#include <stdexcept>
#include <string>

namespace remer {

// Error taxonomy. Everything derives from std::runtime_error so callers can
// catch coarsely; the CLI maps ConfigError (and ParseError) to exit code 2
// and everything else to 3.

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedMdpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyBufferError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContractViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : ConfigError {
  ParseError(int line, const std::string& msg)
      : ConfigError("line " + std::to_string(line) + ": " + msg), line(line) {}
  int line;
};

}  // namespace remer
