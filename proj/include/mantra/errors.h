#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mantra {

/// Malformed grammar file or an inconsistent grammar definition.
class GrammarError : public std::runtime_error {
 public:
  GrammarError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  /// 1-based line in the grammar text, 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Text that is not in the grammar's language.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}

  /// 1-based column of the first offending character (length + 1 for a premature end).
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A rule sequence that cannot be replayed as a leftmost derivation.
class DeriveError : public std::runtime_error {
 public:
  DeriveError(const std::string& what, std::size_t step)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Chemically inconsistent molecule (dangling ring bond, valence violation, ...).
class MoleculeError : public std::runtime_error {
 public:
  explicit MoleculeError(const std::string& what, std::vector<std::size_t> atoms = {})
      : std::runtime_error(what), atoms_(std::move(atoms)) {}

  /// Offending atom indices, when the error is atom-specific.
  const std::vector<std::size_t>& atoms() const noexcept { return atoms_; }

 private:
  std::vector<std::size_t> atoms_;
};

/// Persisted file with a wrong magic, version, or truncated body.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid traversal request (maps to HTTP 400 / CLI usage errors).
class RequestError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// No path exists between two graph nodes.
class NoPathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mantra
