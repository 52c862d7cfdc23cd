#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mantra {

/// Reference to a grammar symbol: either a nonterminal or a terminal index.
struct Symbol {
  enum class Kind : std::uint8_t { kNonterminal, kTerminal };

  Kind kind = Kind::kNonterminal;
  std::uint32_t index = 0;

  static Symbol nonterminal(std::uint32_t i) { return {Kind::kNonterminal, i}; }
  static Symbol terminal(std::uint32_t i) { return {Kind::kTerminal, i}; }
  bool is_terminal() const { return kind == Kind::kTerminal; }

  friend bool operator==(const Symbol&, const Symbol&) = default;
};

/// lhs -> rhs. An empty rhs is an epsilon production.
struct Production {
  std::uint32_t lhs = 0;
  std::vector<Symbol> rhs;

  bool is_epsilon() const { return rhs.empty(); }
  friend bool operator==(const Production&, const Production&) = default;
};

/// One lexical token of an input string under a grammar's terminal set.
struct Token {
  std::uint32_t terminal;
  std::size_t offset;  // 0-based byte offset into the input
  std::size_t length;
};

/// Context-free grammar with a precomputed LL(1) prediction table.
///
/// Production indices are the canonical rule ids used by every encoding.
/// One extra pad rule (index production_count()) is reserved for fixed-shape
/// encodings; it has no left-hand side and is never predicted or decoded.
class Grammar {
 public:
  /// Validates the definition and builds the LL(1) table. Grammars with
  /// prediction conflicts are rejected since their leftmost derivation is not
  /// determined by one token of lookahead.
  static Grammar from_parts(std::vector<std::string> nonterminals,
                            std::vector<std::string> terminals,
                            std::vector<Production> productions, std::uint32_t start_symbol);

  const std::vector<std::string>& nonterminals() const { return nonterminals_; }
  const std::vector<std::string>& terminals() const { return terminals_; }
  const std::vector<Production>& productions() const { return productions_; }
  std::uint32_t start_symbol() const { return start_; }

  std::size_t production_count() const { return productions_.size(); }
  std::size_t pad_rule() const { return productions_.size(); }
  /// Column count of rule one-hot encodings and decoder logits (productions + pad).
  std::size_t rule_width() const { return productions_.size() + 1; }

  /// Production ids whose lhs is `nonterminal`, ascending.
  std::span<const std::size_t> alternatives(std::uint32_t nonterminal) const;

  std::optional<std::uint32_t> find_nonterminal(std::string_view name) const;
  std::optional<std::uint32_t> find_terminal(std::string_view literal) const;

  /// Production to expand `nonterminal` with, given the next terminal
  /// (nullopt = end of input).
  std::optional<std::size_t> predict(std::uint32_t nonterminal,
                                     std::optional<std::uint32_t> lookahead) const;

  /// Maximal-munch tokenization. Throws ParseError on an unknown character.
  std::vector<Token> tokenize(std::string_view text) const;

  std::string symbol_name(const Symbol& s) const;
  /// "lhs -> rhs" in grammar file syntax.
  std::string describe(std::size_t production) const;

 private:
  Grammar() = default;
  void build_tables();

  std::vector<std::string> nonterminals_;
  std::vector<std::string> terminals_;
  std::vector<Production> productions_;
  std::uint32_t start_ = 0;

  std::vector<std::vector<std::size_t>> alternatives_;
  // predict_[nt * (terminals + 1) + t], terminal index terminals_.size() is end of input.
  std::vector<std::int32_t> predict_;
  std::vector<std::uint32_t> terminals_by_length_;
};

/// Parses the line-based grammar file format.
Grammar load_grammar(std::string_view text);
Grammar load_grammar_file(const std::filesystem::path& path);

/// Text of the bundled SMILES grammar.
std::string_view default_grammar_text();
/// The bundled SMILES grammar, loaded once.
const Grammar& default_grammar();

}  // namespace mantra
