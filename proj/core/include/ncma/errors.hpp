#pragma once

#include <stdexcept>
#include <string>

namespace ncma {

// Bad parameters: amplitudes, variances, code sizes, decoder/scheme combos.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input vector has the wrong length for the requested operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Soft input does not line up with a tail-terminated codeword.
class FrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// MAC-layer bookkeeping violation (e.g. packet index out of range).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ncma
