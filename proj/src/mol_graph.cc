#include "mantra/mol_graph.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <map>

#include "mantra/derivation.h"
#include "mantra/errors.h"
#include "mantra/ring_bonds.h"

namespace mantra {

namespace {

int order_value(BondOrder o) { return o == BondOrder::kAromatic ? 1 : static_cast<int>(o); }

// Elements written with two letters inside brackets, as accepted by the
// bundled grammar plus a few common extras.
constexpr std::array<std::string_view, 16> kTwoLetter = {"Cl", "Br", "Li", "Na", "Mg", "Ca", "Al", "Si",
                                                           "Se", "Fe", "Cu", "Zn", "Pt", "Mn", "Ag", "Au"};

struct RingOpen {
  std::size_t atom;
  std::optional<BondOrder> order;
  bool directional;
};

class SmilesReader {
 public:
  explicit SmilesReader(std::string_view text) : text_(text) {}

  MolGraph read() {
    std::vector<std::optional<std::size_t>> branch_stack;
    std::optional<std::size_t> prev;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '(') {
        if (!prev) fail("branch without a preceding atom");
        branch_stack.push_back(prev);
        ++pos_;
      } else if (c == ')') {
        if (branch_stack.empty()) fail("unbalanced ')'");
        if (pending_) fail("bond before ')'");
        prev = branch_stack.back();
        branch_stack.pop_back();
        ++pos_;
      } else if (c == '.') {
        if (pending_) fail("bond before '.'");
        prev.reset();
        ++pos_;
      } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\') {
        if (pending_) fail("two consecutive bonds");
        pending_ = c == '=' ? BondOrder::kDouble
                   : c == '#' ? BondOrder::kTriple
                   : c == ':' ? BondOrder::kAromatic
                              : BondOrder::kSingle;
        pending_directional_ = c == '/' || c == '\\';
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        if (!prev) fail("ring bond without a preceding atom");
        int label = 0;
        if (c == '%') {
          if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
              !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
            fail("'%' must be followed by two digits");
          }
          label = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
          pos_ += 3;
        } else {
          label = c - '0';
          ++pos_;
        }
        ring_bond(label, *prev);
      } else if (c == '[') {
        prev = attach(bracket_atom(), prev);
      } else {
        prev = attach(organic_atom(), prev);
      }
    }
    if (!branch_stack.empty()) fail("unclosed branch");
    if (pending_) fail("dangling bond");
    if (!open_.empty()) {
      std::vector<int> labels;
      for (auto& [label, ro] : open_) labels.push_back(label);
      std::string msg = "unpaired ring digit";
      for (int l : labels) msg += " " + std::to_string(l);
      throw MoleculeError(msg);
    }
    return std::move(mol_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_ + 1); }

  BondOrder default_order(std::size_t a, std::size_t b) const {
    return mol_.atoms()[a].aromatic && mol_.atoms()[b].aromatic ? BondOrder::kAromatic : BondOrder::kSingle;
  }

  std::size_t attach(Atom atom, std::optional<std::size_t> prev) {
    std::size_t idx = mol_.add_atom(std::move(atom));
    if (prev) {
      mol_.add_bond(*prev, idx, pending_.value_or(default_order(*prev, idx)), pending_directional_);
    } else if (pending_) {
      fail("bond without a preceding atom");
    }
    pending_.reset();
    pending_directional_ = false;
    return idx;
  }

  void ring_bond(int label, std::size_t atom) {
    auto it = open_.find(label);
    if (it == open_.end()) {
      open_[label] = RingOpen{atom, pending_, pending_directional_};
    } else {
      RingOpen ro = it->second;
      open_.erase(it);
      if (ro.order && pending_ && *ro.order != *pending_) {
        throw MoleculeError("conflicting bond orders on ring closure " + std::to_string(label));
      }
      BondOrder order = pending_ ? *pending_ : ro.order.value_or(default_order(ro.atom, atom));
      if (ro.atom == atom) throw MoleculeError("ring closure " + std::to_string(label) + " bonds an atom to itself");
      if (mol_.bond_between(ro.atom, atom)) {
        throw MoleculeError("ring closure " + std::to_string(label) + " duplicates an existing bond");
      }
      mol_.add_bond(ro.atom, atom, order, ro.directional || pending_directional_);
    }
    pending_.reset();
    pending_directional_ = false;
  }

  Atom organic_atom() {
    Atom a;
    char c = text_[pos_];
    if (text_.compare(pos_, 2, "Cl") == 0 || text_.compare(pos_, 2, "Br") == 0) {
      a.element = std::string(text_.substr(pos_, 2));
      pos_ += 2;
      return a;
    }
    static const std::string kAliphatic = "BCNOSPFI";
    static const std::string kAromatic = "bcnosp";
    if (kAliphatic.find(c) != std::string::npos) {
      a.element = std::string(1, c);
    } else if (kAromatic.find(c) != std::string::npos) {
      a.element = std::string(1, static_cast<char>(std::toupper(c)));
      a.aromatic = true;
    } else {
      fail(std::string("unexpected character '") + c + "'");
    }
    ++pos_;
    return a;
  }

  Atom bracket_atom() {
    ++pos_;  // '['
    Atom a;
    int isotope = 0;
    bool has_isotope = false;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      isotope = isotope * 10 + (text_[pos_++] - '0');
      has_isotope = true;
    }
    if (has_isotope) a.isotope = isotope;
    if (pos_ >= text_.size()) fail("unterminated bracket atom");
    if (text_.compare(pos_, 2, "se") == 0 || text_.compare(pos_, 2, "as") == 0) {
      a.element = std::string(1, static_cast<char>(std::toupper(text_[pos_]))) + text_[pos_ + 1];
      a.aromatic = true;
      pos_ += 2;
    } else {
      bool two = false;
      for (auto e : kTwoLetter) {
        if (text_.compare(pos_, 2, e) == 0) {
          a.element = std::string(e);
          pos_ += 2;
          two = true;
          break;
        }
      }
      if (!two) {
        char c = text_[pos_];
        if (std::isupper(static_cast<unsigned char>(c))) {
          a.element = std::string(1, c);
        } else if (std::string("bcnosp").find(c) != std::string::npos) {
          a.element = std::string(1, static_cast<char>(std::toupper(c)));
          a.aromatic = true;
        } else {
          fail("bad element in bracket atom");
        }
        ++pos_;
      }
    }
    if (pos_ < text_.size() && text_[pos_] == '@') {
      a.chiral = true;
      ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '@') ++pos_;
    }
    int h = 0;
    if (pos_ < text_.size() && text_[pos_] == 'H') {
      ++pos_;
      h = 1;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) h = text_[pos_++] - '0';
    }
    a.explicit_h = h;
    if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
      int sign = text_[pos_] == '+' ? 1 : -1;
      ++pos_;
      int mag = 1;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) mag = text_[pos_++] - '0';
      a.charge = sign * mag;
    }
    if (pos_ >= text_.size() || text_[pos_] != ']') fail("expected ']'");
    ++pos_;
    return a;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  MolGraph mol_;
  std::optional<BondOrder> pending_;
  bool pending_directional_ = false;
  std::map<int, RingOpen> open_;
};

}  // namespace

std::size_t MolGraph::add_atom(Atom atom) {
  atoms_.push_back(std::move(atom));
  adjacency_.emplace_back();
  return atoms_.size() - 1;
}

std::size_t MolGraph::add_bond(std::size_t a, std::size_t b, BondOrder order, bool directional) {
  if (a >= atoms_.size() || b >= atoms_.size()) throw MoleculeError("bond endpoint out of range");
  if (a == b) throw MoleculeError("self-bond on atom " + std::to_string(a), {a});
  if (bond_between(a, b)) throw MoleculeError("duplicate bond", {a, b});
  bonds_.push_back(Bond{a, b, order, directional});
  std::size_t idx = bonds_.size() - 1;
  adjacency_[a].emplace_back(b, idx);
  adjacency_[b].emplace_back(a, idx);
  return idx;
}

std::optional<std::size_t> MolGraph::bond_between(std::size_t a, std::size_t b) const {
  for (const auto& [n, bond] : adjacency_.at(a)) {
    if (n == b) return bond;
  }
  return std::nullopt;
}

int MolGraph::bonded_valence(std::size_t atom) const {
  int used = atoms_[atom].explicit_h.value_or(0);
  for (const auto& [n, bond] : adjacency_[atom]) used += order_value(bonds_[bond].order);
  return used;
}

int MolGraph::implicit_h(std::size_t atom) const {
  const Atom& a = atoms_[atom];
  if (a.bracket()) return 0;
  int used = bonded_valence(atom);
  // Aromatic B/C/N/P contribute one bond's worth to the pi system; O/S donate a lone pair.
  if (a.aromatic && (a.element == "C" || a.element == "N" || a.element == "B" || a.element == "P")) ++used;
  for (int v : allowed_valences(a.element, a.charge)) {
    if (v >= used) return v - used;
  }
  return 0;
}

int MolGraph::total_h(std::size_t atom) const {
  return implicit_h(atom) + atoms_[atom].explicit_h.value_or(0);
}

bool MolGraph::has_stereo() const {
  return std::any_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.chiral; }) ||
         std::any_of(bonds_.begin(), bonds_.end(), [](const Bond& b) { return b.directional; });
}

std::vector<int> allowed_valences(std::string_view element, int charge) {
  static const std::map<std::string_view, std::vector<int>> kTable = {
      {"H", {1}},  {"B", {3}},        {"C", {4}},  {"N", {3}},  {"O", {2}},  {"F", {1}},
      {"Cl", {1}}, {"Br", {1}},       {"I", {1}},  {"P", {3, 5}}, {"S", {2, 4, 6}}, {"Se", {2, 4, 6}},
      {"Si", {4}},
  };
  auto it = kTable.find(element);
  if (it == kTable.end()) return {};
  // Groups 13/14 lose a bond per unit of charge either way; groups 15-17
  // gain one per positive and lose one per negative charge. H can lose its bond.
  bool low_group = element == "B" || element == "C" || element == "Si" || element == "H";
  std::vector<int> out;
  for (int v : it->second) {
    int adjusted = low_group ? v - std::abs(charge) : v + charge;
    if (adjusted >= 0) out.push_back(adjusted);
  }
  return out;
}

MolGraph read_smiles(std::string_view smiles) { return SmilesReader(smiles).read(); }

std::vector<std::size_t> valence_violations(const MolGraph& mol) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < mol.atom_count(); ++i) {
    const Atom& a = mol.atoms()[i];
    auto allowed = allowed_valences(a.element, a.charge);
    if (allowed.empty()) continue;
    if (mol.bonded_valence(i) > allowed.back()) bad.push_back(i);
  }
  return bad;
}

MolGraph to_molgraph(std::string_view smiles, const Grammar& grammar) {
  parse(smiles, grammar);
  MolGraph mol = read_smiles(smiles);
  auto bad = valence_violations(mol);
  if (!bad.empty()) {
    std::string msg = "valence violation on atom";
    for (std::size_t i : bad) {
      msg += " " + std::to_string(i) + " (" + mol.atoms()[i].element + ", " +
             std::to_string(mol.bonded_valence(i)) + " bonds)";
    }
    throw MoleculeError(msg, bad);
  }
  return mol;
}

std::vector<bool> ring_bonds(const MolGraph& mol) {
  // Bridges via DFS low-link; everything else lies on a cycle.
  const std::size_t n = mol.atom_count();
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> ring(mol.bonds().size(), true);
  int timer = 0;
  std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t u, std::size_t via) {
    disc[u] = low[u] = timer++;
    for (const auto& [v, bond] : mol.neighbors(u)) {
      if (bond == via) continue;
      if (disc[v] < 0) {
        dfs(v, bond);
        low[u] = std::min(low[u], low[v]);
        if (low[v] > disc[u]) ring[bond] = false;
      } else {
        low[u] = std::min(low[u], disc[v]);
      }
    }
  };
  for (std::size_t u = 0; u < n; ++u) {
    if (disc[u] < 0) dfs(u, static_cast<std::size_t>(-1));
  }
  return ring;
}

std::vector<bool> ring_atoms(const MolGraph& mol) {
  std::vector<bool> atoms(mol.atom_count(), false);
  auto rb = ring_bonds(mol);
  for (std::size_t b = 0; b < rb.size(); ++b) {
    if (rb[b]) atoms[mol.bonds()[b].a] = atoms[mol.bonds()[b].b] = true;
  }
  return atoms;
}

ValidityReport validate(const MolGraph& mol) {
  ValidityReport r;
  for (std::size_t i : valence_violations(mol)) {
    r.reasons.push_back("valence violation on atom " + std::to_string(i) + " (" + mol.atoms()[i].element + ")");
  }
  auto in_ring = ring_atoms(mol);
  for (std::size_t i = 0; i < mol.atom_count(); ++i) {
    if (mol.atoms()[i].aromatic && !in_ring[i]) r.reasons.push_back("acyclic aromatic atom " + std::to_string(i));
  }
  if (mol.atom_count() == 0) r.reasons.push_back("empty molecule");
  r.valid = r.reasons.empty();
  return r;
}

ValidityReport validate_smiles(std::string_view smiles, const Grammar& grammar) {
  ValidityReport r;
  try {
    parse(smiles, grammar);
  } catch (const ParseError& e) {
    r.valid = false;
    r.reasons.push_back(std::string("parse failure: ") + e.what());
    return r;
  }
  RingPairing rings = check_ring_pairing(smiles);
  if (!rings.paired) {
    for (int l : rings.unpaired) r.reasons.push_back("unpaired ring digit " + std::to_string(l));
    r.valid = false;
    return r;
  }
  try {
    return validate(read_smiles(smiles));
  } catch (const std::exception& e) {
    r.valid = false;
    r.reasons.push_back(e.what());
  }
  return r;
}

}  // namespace mantra
