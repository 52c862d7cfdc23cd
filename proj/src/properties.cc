#include "mantra/properties.h"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "mantra/errors.h"

namespace mantra {

double atomic_mass(std::string_view element) {
  static const std::map<std::string_view, double> kMass = {
      {"H", 1.008},    {"Li", 6.94},    {"B", 10.81},    {"C", 12.011},  {"N", 14.007},  {"O", 15.999},
      {"F", 18.998},   {"Na", 22.990},  {"Mg", 24.305},  {"Al", 26.982}, {"Si", 28.085}, {"P", 30.974},
      {"S", 32.06},    {"Cl", 35.45},   {"K", 39.098},   {"Ca", 40.078}, {"Mn", 54.938}, {"Fe", 55.845},
      {"Cu", 63.546},  {"Zn", 65.38},   {"As", 74.922},  {"Se", 78.971}, {"Br", 79.904}, {"Ag", 107.87},
      {"I", 126.90},   {"Pt", 195.08},  {"Au", 196.97},
  };
  auto it = kMass.find(element);
  if (it == kMass.end()) throw MoleculeError("no atomic mass for element '" + std::string(element) + "'");
  return it->second;
}

double molecular_weight(const MolGraph& mol) {
  double mw = 0.0;
  int hydrogens = 0;
  for (std::size_t i = 0; i < mol.atom_count(); ++i) {
    mw += atomic_mass(mol.atoms()[i].element);
    hydrogens += mol.total_h(i);
  }
  return mw + 1.008 * hydrogens;
}

LipinskiCounts lipinski_counts(const MolGraph& mol) {
  LipinskiCounts c;
  c.molecular_weight = molecular_weight(mol);
  for (std::size_t i = 0; i < mol.atom_count(); ++i) {
    const auto& e = mol.atoms()[i].element;
    if (e == "N" || e == "O") {
      ++c.h_acceptors;
      c.h_donors += mol.total_h(i);
    }
  }
  auto in_ring = ring_bonds(mol);
  for (std::size_t b = 0; b < mol.bonds().size(); ++b) {
    const Bond& bond = mol.bonds()[b];
    if (bond.order != BondOrder::kSingle || in_ring[b]) continue;
    if (mol.degree(bond.a) > 1 && mol.degree(bond.b) > 1) ++c.rotatable_bonds;
  }
  return c;
}

double ramp_down(double value, double limit, double zero_at) {
  if (value <= limit) return 1.0;
  if (value >= zero_at) return 0.0;
  return (zero_at - value) / (zero_at - limit);
}

double drug_likeness(const LipinskiCounts& c) {
  return (ramp_down(c.molecular_weight, 500.0, 700.0) + ramp_down(c.h_donors, 5.0, 10.0) +
          ramp_down(c.h_acceptors, 10.0, 15.0) + ramp_down(c.rotatable_bonds, 10.0, 15.0)) /
         4.0;
}

double drug_likeness(const MolGraph& mol) { return drug_likeness(lipinski_counts(mol)); }

ActivityClass activity_class(double p_activity) {
  if (std::isnan(p_activity)) throw std::invalid_argument("activity value is NaN");
  if (p_activity < 5.0) return ActivityClass::kInactive;
  if (p_activity <= 7.0) return ActivityClass::kIntermediate;
  return ActivityClass::kActive;
}

std::string_view to_string(ActivityClass c) {
  switch (c) {
    case ActivityClass::kInactive:
      return "inactive";
    case ActivityClass::kIntermediate:
      return "intermediate";
    case ActivityClass::kActive:
      return "active";
  }
  return "unknown";
}

}  // namespace mantra
