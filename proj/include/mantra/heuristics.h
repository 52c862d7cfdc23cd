#pragma once

#include <optional>
#include <string_view>

#include "mantra/fingerprint.h"
#include "mantra/grammar.h"
#include "mantra/mol_graph.h"
#include "mantra/properties.h"
#include "mantra/sa_score.h"

namespace mantra {

/// Precomputed per-compound inputs of the heuristic distances.
struct CompoundProperties {
  Fingerprint fingerprint;
  double sa = 1.0;
  double drug_likeness = 1.0;
  double molecular_weight = 0.0;
  std::optional<double> activity;
};

CompoundProperties compute_properties(const MolGraph& mol, const FragmentTable& table,
                                      std::optional<double> activity = std::nullopt);

/// Per-pair distances, each in [0, 1].
struct HeuristicVector {
  double fingerprint_dist = 0.0;
  double sa_dist = 0.0;
  double druglike_dist = 0.0;
  double activity_dist = 0.0;
  bool activity_missing = false;
};

/// Heuristic weights, one per HeuristicVector component.
struct HeuristicWeights {
  double fingerprint = 1.0;
  double sa = 0.0;
  double druglike = 0.0;
  double activity = 0.0;
};

HeuristicVector heuristic_distance(const CompoundProperties& a, const CompoundProperties& b);

/// sum_k H^k * W^k.
double weighted_sum(const HeuristicVector& h, const HeuristicWeights& w);

}  // namespace mantra
