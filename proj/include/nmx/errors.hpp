#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nmx {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed model file; line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& what)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// A configurable cap was exceeded. `count` is the size reached when the cap tripped.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, std::uint64_t count)
      : Error(what + " (count " + std::to_string(count) + ")"), count_(count) {}
  std::uint64_t count() const { return count_; }

 private:
  std::uint64_t count_;
};

// An agent-level strategy has no entry for a history that was reached.
class StrategyError : public Error {
 public:
  StrategyError(int subsystem, int agent, int t)
      : Error("strategy undefined for agent (k=" + std::to_string(agent + 1) + ", n=" +
              std::to_string(subsystem + 1) + ") at t=" + std::to_string(t)),
        subsystem_(subsystem),
        agent_(agent),
        t_(t) {}
  int subsystem() const { return subsystem_; }
  int agent() const { return agent_; }
  int t() const { return t_; }

 private:
  int subsystem_;
  int agent_;
  int t_;
};

// The information structure references a variable that the hat state cannot carry.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

class InfeasibleObservation : public Error {
 public:
  using Error::Error;
};

class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace nmx
