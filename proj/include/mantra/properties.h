#pragma once

#include <optional>
#include <string_view>

#include "mantra/mol_graph.h"

namespace mantra {

/// Standard atomic weight (IUPAC abridged); throws MoleculeError when the
/// element has no entry.
double atomic_mass(std::string_view element);

/// Sum of atomic masses plus 1.008 Da per hydrogen (implicit and explicit).
double molecular_weight(const MolGraph& mol);

struct LipinskiCounts {
  double molecular_weight = 0.0;
  int h_donors = 0;      // hydrogens on N and O
  int h_acceptors = 0;   // N and O atoms
  int rotatable_bonds = 0;
};

LipinskiCounts lipinski_counts(const MolGraph& mol);

/// 1 at or below `limit`, 0 at or above `zero_at`, linear in between.
double ramp_down(double value, double limit, double zero_at);

/// Mean of four rule-of-five ramps: MW 500->700, donors 5->10,
/// acceptors 10->15, rotatable bonds 10->15.
double drug_likeness(const MolGraph& mol);
double drug_likeness(const LipinskiCounts& counts);

enum class ActivityClass { kInactive = 0, kIntermediate = 1, kActive = 2 };

/// < 5 inactive, [5, 7] intermediate, > 7 active. Throws on NaN.
ActivityClass activity_class(double p_activity);
inline int rank(ActivityClass c) { return static_cast<int>(c); }
std::string_view to_string(ActivityClass c);

}  // namespace mantra
