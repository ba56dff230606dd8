#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfst {

struct Pos {
  int line = 0;
  int col = 0;
};

enum class Severity { Error, Warning, Note };

struct Diagnostic {
  Pos pos;
  Severity severity = Severity::Error;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

/// Renders `file:line:col: severity: message`.
std::string format_diagnostic(const std::string& file, const Diagnostic& d);

/// Thrown inside a phase and caught at its boundary, where it becomes a
/// Diagnostic.
class CompileError : public std::runtime_error {
 public:
  CompileError(Pos pos, std::string message)
      : std::runtime_error(message), pos_(pos) {}

  Pos pos() const { return pos_; }
  Diagnostic diagnostic() const { return {pos_, Severity::Error, what()}; }

 private:
  Pos pos_;
};

}  // namespace cfst
