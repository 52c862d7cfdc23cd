#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mantra/derivation.h"
#include "mantra/grammar.h"
#include "mantra/logit_matrix.h"

namespace mantra {

/// mask[p] == true iff production p expands `stack_top`. Length production_count().
std::vector<bool> valid_mask(std::uint32_t stack_top, const Grammar& grammar);

struct StackDecodeOptions {
  /// 0 selects argmax with lowest-index tie-break; > 0 samples from the
  /// masked softmax of logits / temperature.
  double temperature = 0.0;
  std::uint64_t seed = 0;
};

struct StackDecodeResult {
  RuleSequence rules;
  std::string text;
};

/// Grammar-masked decoding of one rule per logit row. Stops when the stack
/// empties or rows run out; `rules.complete` tells which. Expects
/// logits.cols() == grammar.rule_width(); the pad column is never selected.
StackDecodeResult stack_decode(const LogitMatrix& logits, const Grammar& grammar,
                               const StackDecodeOptions& options = {});

}  // namespace mantra
