#pragma once

#include <stdexcept>
#include <string>

namespace dra {

// A dual variable left the open domain of an inverse-gradient map.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver failed to reach its tolerance within its budget.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration, mis-scheduled call, or inconsistent arguments.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Scenario-file error anchored to a 1-based line number; line 0 marks
// file-level problems such as a missing section.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace dra
