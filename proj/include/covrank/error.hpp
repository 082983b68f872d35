#pragma once

#include <stdexcept>
#include <string>

namespace covrank {

// Domain error: the inputs are well-formed but violate an operation's
// preconditions (single-class training data, no positives, ...).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input/output failure: unreadable or unwritable files, malformed records.
class IoError : public Error {
 public:
  using Error::Error;
};

// A record that does not match its file schema. Carries the 1-based line.
class ParseError : public IoError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : IoError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace covrank
