#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mantra/grammar.h"

namespace mantra {

enum class BondOrder : std::uint8_t { kSingle = 1, kDouble = 2, kTriple = 3, kAromatic = 4 };

struct Atom {
  std::string element;  // capitalized symbol; aromatic 'c' is stored as "C" + aromatic
  int charge = 0;
  bool aromatic = false;
  std::optional<int> explicit_h;  // set for bracket atoms only
  int isotope = 0;
  bool chiral = false;

  bool bracket() const { return explicit_h.has_value(); }
};

struct Bond {
  std::size_t a = 0;
  std::size_t b = 0;
  BondOrder order = BondOrder::kSingle;
  bool directional = false;  // written as '/' or '\'

  std::size_t other(std::size_t atom) const { return atom == a ? b : a; }
};

/// Molecular graph with implicit hydrogens derived from a valence table.
class MolGraph {
 public:
  std::size_t add_atom(Atom atom);
  /// Throws MoleculeError on bad endpoints, self-bonds, or duplicate bonds.
  std::size_t add_bond(std::size_t a, std::size_t b, BondOrder order, bool directional = false);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Bond>& bonds() const { return bonds_; }
  std::size_t atom_count() const { return atoms_.size(); }

  /// (neighbor, bond index) pairs in bond insertion order.
  const std::vector<std::pair<std::size_t, std::size_t>>& neighbors(std::size_t atom) const {
    return adjacency_[atom];
  }
  std::size_t degree(std::size_t atom) const { return adjacency_[atom].size(); }
  std::optional<std::size_t> bond_between(std::size_t a, std::size_t b) const;

  /// Implicit hydrogens (0 for bracket atoms).
  int implicit_h(std::size_t atom) const;
  int total_h(std::size_t atom) const;

  /// Bond order sum plus explicit hydrogens, aromatic bonds counting 1.
  int bonded_valence(std::size_t atom) const;

  /// Any chirality or directional-bond marker.
  bool has_stereo() const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency_;
};

/// Allowed valences for an element at a formal charge; empty when the element
/// has no entry (metals), in which case no valence rule applies.
std::vector<int> allowed_valences(std::string_view element, int charge);

/// Builds the graph structure of a SMILES string without valence checks.
/// Throws ParseError on malformed text and MoleculeError on unpaired ring
/// digits or impossible ring closures.
MolGraph read_smiles(std::string_view smiles);

/// Atoms whose bonded valence exceeds every allowed valence.
std::vector<std::size_t> valence_violations(const MolGraph& mol);

/// Parses under `grammar`, builds the graph and rejects valence violations
/// (MoleculeError listing the atoms).
MolGraph to_molgraph(std::string_view smiles, const Grammar& grammar);

struct ValidityReport {
  bool valid = true;
  std::vector<std::string> reasons;
};

/// Structural validity of a graph: valences within the table and every
/// aromatic atom on a cycle.
ValidityReport validate(const MolGraph& mol);

/// Validity of a string: grammar parse, ring-digit pairing, then validate().
ValidityReport validate_smiles(std::string_view smiles, const Grammar& grammar);

/// Ring membership of bonds (a bond is a ring bond iff it is not a bridge).
std::vector<bool> ring_bonds(const MolGraph& mol);
std::vector<bool> ring_atoms(const MolGraph& mol);

}  // namespace mantra
