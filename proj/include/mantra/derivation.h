#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mantra/grammar.h"
#include "mantra/logit_matrix.h"

namespace mantra {

/// Production ids of a leftmost derivation.
struct RuleSequence {
  std::vector<std::size_t> rule_ids;
  bool complete = false;  // derivation stack emptied

  friend bool operator==(const RuleSequence&, const RuleSequence&) = default;
};

/// Result of replaying a rule sequence.
struct Derivation {
  std::string text;             // terminals emitted so far
  bool complete = false;        // stack empty after replay
  std::vector<Symbol> pending;  // remaining stack, top first
};

/// Leftmost derivation of `text`. Throws ParseError with the 1-based column of
/// the first offending character.
RuleSequence parse(std::string_view text, const Grammar& grammar);

/// Replays `rule_ids` from the start symbol. The pad rule is a no-op.
/// Throws DeriveError naming the step on lhs/stack-top mismatch.
Derivation derive(std::span<const std::size_t> rule_ids, const Grammar& grammar);
inline Derivation derive(const RuleSequence& rules, const Grammar& grammar) {
  return derive(rules.rule_ids, grammar);
}

/// t_max x rule_width one-hot rows; rows past the sequence select the pad rule.
LogitMatrix encode_onehot_rules(const RuleSequence& rules, const Grammar& grammar, std::size_t t_max);

/// t_max x (alphabet.size() + 1) per-character one-hot; the last column is pad.
LogitMatrix encode_onehot_chars(std::string_view text, std::string_view alphabet, std::size_t t_max);

}  // namespace mantra
