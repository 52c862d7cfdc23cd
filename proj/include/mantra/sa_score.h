#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "mantra/mol_graph.h"

namespace mantra {

/// Occurrence counts of hashed circular atom environments.
class FragmentTable {
 public:
  void add(std::uint64_t environment, std::uint64_t count = 1);
  std::uint64_t count(std::uint64_t environment) const;
  std::uint64_t total() const { return total_; }
  std::size_t size() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }
  /// Entries sorted by hash.
  const std::map<std::uint64_t, std::uint64_t>& entries() const { return counts_; }

  friend bool operator==(const FragmentTable&, const FragmentTable&) = default;

 private:
  std::map<std::uint64_t, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Per-atom circular environment hashes for radius 0..max_radius. An atom's
/// list stops growing once a larger radius would cover no new bonds, so its
/// last element is its largest distinct environment.
std::vector<std::vector<std::uint64_t>> circular_environments(const MolGraph& mol, int max_radius = 2);

FragmentTable build_fragment_table(std::span<const MolGraph> corpus);

struct RingComplexity {
  bool fused = false;       // two rings sharing at least two atoms
  bool macrocycle = false;  // some ring with more than 8 atoms
  std::size_t largest_smallest_ring = 0;
};

RingComplexity ring_complexity(const MolGraph& mol);

struct SaBreakdown {
  double fragment_rarity = 0.0;  // in [0, 6]
  double fused_penalty = 0.0;
  double macrocycle_penalty = 0.0;
  double size_penalty = 0.0;
  double stereo_penalty = 0.0;
  double score = 1.0;  // clamp(1 + sum, 1, 10)
};

/// Synthetic-accessibility estimate: fragment rarity against `table` plus
/// ring, size and stereo complexity penalties. Throws on an empty table.
SaBreakdown sa_breakdown(const MolGraph& mol, const FragmentTable& table);
double sa_score(const MolGraph& mol, const FragmentTable& table);

}  // namespace mantra
