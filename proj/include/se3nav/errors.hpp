#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace se3nav {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// log of a rotation at (or too near) angle pi.
class BranchCutError : public Error {
 public:
  using Error::Error;
};

/// Relation-tree size guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Raised when gamma + f and G vanish together, so psi is 0/0.
class DegenerateConfiguration : public Error {
 public:
  explicit DegenerateConfiguration(const std::string& what, int agent = -1,
                                   long tick = -1)
      : Error(what), agent_(agent), tick_(tick) {}
  int agent() const noexcept { return agent_; }
  long tick() const noexcept { return tick_; }

 private:
  int agent_;
  long tick_;
};

class IllConditionedGram : public Error {
 public:
  IllConditionedGram(const std::string& what, double condition_estimate)
      : Error(what), condition_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_; }

 private:
  double condition_;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class IntegrationDiverged : public Error {
 public:
  IntegrationDiverged(const std::string& what, long tick)
      : Error(what), tick_(tick) {}
  long tick() const noexcept { return tick_; }

 private:
  long tick_;
};

/// Text-format error carrying a 1-based line/column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Collects every violation found while validating a configuration.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "configuration invalid:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

}  // namespace se3nav
