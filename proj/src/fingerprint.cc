#include "mantra/fingerprint.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace mantra {

namespace {

std::string atom_token(const Atom& a) {
  return a.element + "|" + std::to_string(a.charge) + "|" + (a.aromatic ? "1" : "0");
}

char bond_token(BondOrder o) {
  switch (o) {
    case BondOrder::kSingle:
      return '-';
    case BondOrder::kDouble:
      return '=';
    case BondOrder::kTriple:
      return '#';
    case BondOrder::kAromatic:
      return ':';
  }
  return '?';
}

std::string directed_reading(const MolGraph& mol, const std::vector<std::size_t>& path, bool reversed) {
  std::string out;
  for (std::size_t k = 0; k < path.size(); ++k) {
    std::size_t i = reversed ? path[path.size() - 1 - k] : path[k];
    if (k > 0) {
      std::size_t j = reversed ? path[path.size() - k] : path[k - 1];
      out += bond_token(mol.bonds()[*mol.bond_between(j, i)].order);
    }
    out += atom_token(mol.atoms()[i]);
  }
  return out;
}

void check_lengths(const Fingerprint& a, const Fingerprint& b) {
  if (a.nbits() != b.nbits()) throw std::invalid_argument("fingerprint length mismatch");
}

std::size_t common_bits(const Fingerprint& a, const Fingerprint& b) {
  std::size_t n = 0;
  for (std::size_t w = 0; w < a.words().size(); ++w) n += std::popcount(a.words()[w] & b.words()[w]);
  return n;
}

}  // namespace

std::size_t Fingerprint::popcount() const {
  std::size_t n = 0;
  for (auto w : words_) n += std::popcount(w);
  return n;
}

std::vector<std::size_t> Fingerprint::on_bits() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nbits_; ++i) {
    if (test(i)) out.push_back(i);
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::vector<std::size_t>> enumerate_paths(const MolGraph& mol, std::size_t max_atoms) {
  std::vector<std::vector<std::size_t>> out;
  if (max_atoms == 0) return out;
  std::vector<std::size_t> path;
  std::vector<bool> on_path(mol.atom_count(), false);
  // Depth-first extension from each start atom; a path of two or more atoms
  // is reached from both ends, so keep only the reading with first < last.
  auto extend = [&](auto&& self) -> void {
    if (path.size() == 1 || path.front() < path.back()) out.push_back(path);
    if (path.size() == max_atoms) return;
    for (const auto& [n, bond] : mol.neighbors(path.back())) {
      if (on_path[n]) continue;
      on_path[n] = true;
      path.push_back(n);
      self(self);
      path.pop_back();
      on_path[n] = false;
    }
  };
  for (std::size_t s = 0; s < mol.atom_count(); ++s) {
    path.assign(1, s);
    on_path[s] = true;
    extend(extend);
    on_path[s] = false;
  }
  return out;
}

std::string path_key(const MolGraph& mol, const std::vector<std::size_t>& path) {
  std::string fwd = directed_reading(mol, path, false);
  std::string rev = directed_reading(mol, path, true);
  return std::min(fwd, rev);
}

Fingerprint fingerprint(const MolGraph& mol, std::size_t nbits, std::size_t max_path) {
  if (nbits == 0 || !std::has_single_bit(nbits)) throw std::invalid_argument("nbits must be a power of two");
  if (max_path == 0) throw std::invalid_argument("max_path must be at least 1");
  Fingerprint fp(nbits);
  for (const auto& path : enumerate_paths(mol, max_path)) fp.set(fnv1a64(path_key(mol, path)) % nbits);
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  check_lengths(a, b);
  std::size_t both = common_bits(a, b);
  std::size_t either = a.popcount() + b.popcount() - both;
  if (either == 0) return 0.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

double cosine_similarity(const Fingerprint& a, const Fingerprint& b) {
  check_lengths(a, b);
  std::size_t pa = a.popcount();
  std::size_t pb = b.popcount();
  if (pa == 0 || pb == 0) return 0.0;
  return static_cast<double>(common_bits(a, b)) / std::sqrt(static_cast<double>(pa) * static_cast<double>(pb));
}

}  // namespace mantra
