#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lcf {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. Line and column are 1-based.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, int line, int column)
      : Error("syntax error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Structural problems: unknown names, dimension mismatches, dangling chart
/// references. Carries every diagnostic found, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(what), diagnostics_{what} {}
  explicit ValidationError(std::vector<std::string> diagnostics)
      : Error(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  static std::string join(const std::vector<std::string>& d) {
    std::string out;
    for (const auto& s : d) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> diagnostics_;
};

/// Malformed input files: bad JSON or unparsable expressions inside them.
struct ParseError : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct SingularMatrix : Error {
  using Error::Error;
};
struct PathDiscontinuity : Error {
  using Error::Error;
};
struct AtlasMismatch : Error {
  using Error::Error;
};
struct MorphismCocycleViolation : Error {
  using Error::Error;
};
struct GroupMismatch : Error {
  using Error::Error;
};
struct TowerInvariantViolation : Error {
  using Error::Error;
};
struct LevelOutOfRange : Error {
  using Error::Error;
};

}  // namespace lcf
