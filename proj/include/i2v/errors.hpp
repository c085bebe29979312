#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace i2v {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (session logs, taxonomy files, embedding files).
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t line)
      : Error(std::move(message) + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Invalid configuration or precondition violation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Semantically invalid data (empty vocabulary, corrupt index, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Filesystem-level failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace i2v
