#include "mantra/stack_decoder.h"

#include <cmath>
#include <random>
#include <stdexcept>

namespace mantra {

std::vector<bool> valid_mask(std::uint32_t stack_top, const Grammar& grammar) {
  if (stack_top >= grammar.nonterminals().size()) {
    throw std::invalid_argument("stack top " + std::to_string(stack_top) + " is not a nonterminal");
  }
  auto alts = grammar.alternatives(stack_top);
  if (alts.empty()) {
    throw std::invalid_argument("nonterminal '" + grammar.nonterminals()[stack_top] + "' has no productions");
  }
  std::vector<bool> mask(grammar.production_count(), false);
  for (std::size_t p : alts) mask[p] = true;
  return mask;
}

StackDecodeResult stack_decode(const LogitMatrix& logits, const Grammar& grammar,
                               const StackDecodeOptions& options) {
  if (logits.cols() != grammar.rule_width()) {
    throw std::invalid_argument("logit matrix has " + std::to_string(logits.cols()) + " columns, grammar needs " +
                                std::to_string(grammar.rule_width()));
  }
  std::mt19937_64 rng(options.seed);
  StackDecodeResult out;
  std::vector<Symbol> stack{Symbol::nonterminal(grammar.start_symbol())};
  auto flush = [&] {
    while (!stack.empty() && stack.back().is_terminal()) {
      out.text += grammar.terminals()[stack.back().index];
      stack.pop_back();
    }
  };

  std::vector<double> weights;
  for (std::size_t t = 0; t < logits.rows(); ++t) {
    flush();
    if (stack.empty()) break;
    const std::uint32_t top = stack.back().index;
    auto alts = grammar.alternatives(top);
    if (alts.empty()) break;  // unreachable for validated grammars
    auto row = logits.row(t);

    std::size_t chosen = alts.front();
    if (options.temperature > 0.0) {
      double best = row[alts.front()];
      for (std::size_t p : alts) best = std::max(best, row[p]);
      weights.clear();
      for (std::size_t p : alts) weights.push_back(std::exp((row[p] - best) / options.temperature));
      std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
      chosen = alts[pick(rng)];
    } else {
      for (std::size_t p : alts) {
        if (row[p] > row[chosen]) chosen = p;  // strict: lowest index wins ties
      }
    }
    out.rules.rule_ids.push_back(chosen);
    stack.pop_back();
    const auto& rhs = grammar.productions()[chosen].rhs;
    for (auto it = rhs.rbegin(); it != rhs.rend(); ++it) stack.push_back(*it);
  }
  flush();
  out.rules.complete = stack.empty();
  return out;
}

}  // namespace mantra
