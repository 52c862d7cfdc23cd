#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mantra/mol_graph.h"

namespace mantra {

/// Fixed-length bit vector.
class Fingerprint {
 public:
  Fingerprint() = default;
  explicit Fingerprint(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

  std::size_t nbits() const { return nbits_; }
  void set(std::size_t bit) { words_.at(bit / 64) |= std::uint64_t{1} << (bit % 64); }
  bool test(std::size_t bit) const { return (words_.at(bit / 64) >> (bit % 64)) & 1U; }
  std::size_t popcount() const;
  std::vector<std::size_t> on_bits() const;
  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;

 private:
  std::size_t nbits_ = 0;
  std::vector<std::uint64_t> words_;
};

std::uint64_t fnv1a64(std::string_view bytes);

/// All simple atom paths with 1..max_atoms atoms, each listed once in the
/// orientation whose atom-index sequence is lexicographically smaller.
std::vector<std::vector<std::size_t>> enumerate_paths(const MolGraph& mol, std::size_t max_atoms);

/// Serialization hashed for one path: atom tokens "element|charge|aromatic"
/// joined by bond tokens (- = # :), the smaller of the two directed readings.
std::string path_key(const MolGraph& mol, const std::vector<std::size_t>& path);

/// Linear-path fingerprint: bit fnv1a64(path_key) mod nbits for every path of
/// up to max_path atoms. nbits must be a power of two.
Fingerprint fingerprint(const MolGraph& mol, std::size_t nbits = 2048, std::size_t max_path = 7);

/// |a & b| / |a | b|; 0 when both are empty. Throws on length mismatch.
double tanimoto(const Fingerprint& a, const Fingerprint& b);
/// |a & b| / sqrt(|a| |b|); 0 when either is empty.
double cosine_similarity(const Fingerprint& a, const Fingerprint& b);

}  // namespace mantra
