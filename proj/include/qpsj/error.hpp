#pragma once

#include <stdexcept>
#include <string>

namespace qpsj {

// Malformed netlist text. Carries the 1-based physical line number of the
// logical line that failed (0 when the error is not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Well-formed netlist that cannot be turned into a simulatable circuit.
class ElaborationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Newton or integration failure. `time` is the simulation time in ps at
// which the failure happened (negative for the operating point).
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(double time, const std::string& what)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace qpsj
