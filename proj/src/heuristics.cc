#include "mantra/heuristics.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace mantra {

CompoundProperties compute_properties(const MolGraph& mol, const FragmentTable& table,
                                      std::optional<double> activity) {
  CompoundProperties p;
  p.fingerprint = fingerprint(mol);
  p.sa = sa_score(mol, table);
  LipinskiCounts counts = lipinski_counts(mol);
  p.drug_likeness = drug_likeness(counts);
  p.molecular_weight = counts.molecular_weight;
  p.activity = activity;
  return p;
}

HeuristicVector heuristic_distance(const CompoundProperties& a, const CompoundProperties& b) {
  HeuristicVector h;
  h.fingerprint_dist = 1.0 - tanimoto(a.fingerprint, b.fingerprint);
  h.sa_dist = std::min(1.0, std::abs(a.sa - b.sa) / 9.0);
  h.druglike_dist = std::abs(a.drug_likeness - b.drug_likeness);
  if (a.activity && b.activity) {
    h.activity_dist = std::abs(rank(activity_class(*a.activity)) - rank(activity_class(*b.activity))) / 2.0;
  } else {
    h.activity_missing = true;
  }
  return h;
}

double weighted_sum(const HeuristicVector& h, const HeuristicWeights& w) {
  return h.fingerprint_dist * w.fingerprint + h.sa_dist * w.sa + h.druglike_dist * w.druglike +
         h.activity_dist * w.activity;
}

}  // namespace mantra
