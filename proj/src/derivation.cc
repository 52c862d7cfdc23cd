#include "mantra/derivation.h"

#include <optional>

#include "mantra/errors.h"

namespace mantra {

RuleSequence parse(std::string_view text, const Grammar& grammar) {
  const std::vector<Token> tokens = grammar.tokenize(text);
  auto describe_at = [&](std::size_t k) -> std::string {
    if (k >= tokens.size()) return "unexpected end of input";
    return "unexpected '" + grammar.terminals()[tokens[k].terminal] + "'";
  };
  auto column_at = [&](std::size_t k) { return k >= tokens.size() ? text.size() + 1 : tokens[k].offset + 1; };

  RuleSequence out;
  std::vector<Symbol> stack{Symbol::nonterminal(grammar.start_symbol())};
  std::size_t k = 0;
  while (!stack.empty()) {
    Symbol top = stack.back();
    stack.pop_back();
    if (top.is_terminal()) {
      if (k >= tokens.size() || tokens[k].terminal != top.index) {
        throw ParseError(describe_at(k) + ", expected " + grammar.symbol_name(top), column_at(k));
      }
      ++k;
      continue;
    }
    std::optional<std::uint32_t> look;
    if (k < tokens.size()) look = tokens[k].terminal;
    auto p = grammar.predict(top.index, look);
    if (!p) throw ParseError(describe_at(k) + " while expanding " + grammar.symbol_name(top), column_at(k));
    out.rule_ids.push_back(*p);
    const auto& rhs = grammar.productions()[*p].rhs;
    for (auto it = rhs.rbegin(); it != rhs.rend(); ++it) stack.push_back(*it);
  }
  if (k != tokens.size()) throw ParseError("trailing input", column_at(k));
  out.complete = true;
  return out;
}

Derivation derive(std::span<const std::size_t> rule_ids, const Grammar& grammar) {
  Derivation d;
  std::vector<Symbol> stack{Symbol::nonterminal(grammar.start_symbol())};
  auto flush = [&] {
    while (!stack.empty() && stack.back().is_terminal()) {
      d.text += grammar.terminals()[stack.back().index];
      stack.pop_back();
    }
  };
  for (std::size_t step = 0; step < rule_ids.size(); ++step) {
    const std::size_t id = rule_ids[step];
    if (id == grammar.pad_rule()) continue;
    if (id > grammar.pad_rule()) throw DeriveError("rule id " + std::to_string(id) + " out of range", step);
    flush();
    if (stack.empty()) throw DeriveError("derivation already complete", step);
    const Production& prod = grammar.productions()[id];
    if (stack.back().index != prod.lhs) {
      throw DeriveError("rule '" + grammar.describe(id) + "' does not expand stack top " +
                            grammar.symbol_name(stack.back()),
                        step);
    }
    stack.pop_back();
    for (auto it = prod.rhs.rbegin(); it != prod.rhs.rend(); ++it) stack.push_back(*it);
  }
  flush();
  d.complete = stack.empty();
  d.pending.assign(stack.rbegin(), stack.rend());
  return d;
}

LogitMatrix encode_onehot_rules(const RuleSequence& rules, const Grammar& grammar, std::size_t t_max) {
  if (rules.rule_ids.size() > t_max) {
    throw std::invalid_argument("rule sequence of length " + std::to_string(rules.rule_ids.size()) +
                                " exceeds t_max " + std::to_string(t_max));
  }
  LogitMatrix m(t_max, grammar.rule_width());
  for (std::size_t t = 0; t < t_max; ++t) {
    std::size_t id = t < rules.rule_ids.size() ? rules.rule_ids[t] : grammar.pad_rule();
    if (id >= grammar.rule_width()) throw std::invalid_argument("rule id out of range");
    m(t, id) = 1.0;
  }
  return m;
}

LogitMatrix encode_onehot_chars(std::string_view text, std::string_view alphabet, std::size_t t_max) {
  if (text.size() > t_max) {
    throw std::invalid_argument("input of length " + std::to_string(text.size()) + " exceeds t_max " +
                                std::to_string(t_max));
  }
  LogitMatrix m(t_max, alphabet.size() + 1);
  for (std::size_t t = 0; t < t_max; ++t) {
    std::size_t col = alphabet.size();
    if (t < text.size()) {
      col = alphabet.find(text[t]);
      if (col == std::string_view::npos) {
        throw std::invalid_argument("unknown character '" + std::string(1, text[t]) + "' at position " +
                                    std::to_string(t + 1));
      }
    }
    m(t, col) = 1.0;
  }
  return m;
}

}  // namespace mantra
