#include "mantra/sa_score.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>

#include "mantra/fingerprint.h"

namespace mantra {

namespace {

void append_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Bond count minus atom count plus one, per biconnected block.
std::vector<std::size_t> block_cycle_ranks(const MolGraph& mol) {
  const std::size_t n = mol.atom_count();
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<std::size_t> edge_stack;
  std::vector<std::size_t> ranks;
  int timer = 0;
  auto pop_block = [&](std::size_t until) {
    std::vector<std::size_t> atoms;
    std::size_t edges = 0;
    while (true) {
      std::size_t e = edge_stack.back();
      edge_stack.pop_back();
      ++edges;
      atoms.push_back(mol.bonds()[e].a);
      atoms.push_back(mol.bonds()[e].b);
      if (e == until) break;
    }
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    ranks.push_back(edges + 1 - atoms.size());
  };
  std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t u, std::size_t via) {
    disc[u] = low[u] = timer++;
    for (const auto& [v, bond] : mol.neighbors(u)) {
      if (bond == via) continue;
      if (disc[v] < 0) {
        edge_stack.push_back(bond);
        dfs(v, bond);
        low[u] = std::min(low[u], low[v]);
        if (low[v] >= disc[u]) pop_block(bond);
      } else if (disc[v] < disc[u]) {
        edge_stack.push_back(bond);
        low[u] = std::min(low[u], disc[v]);
      }
    }
  };
  for (std::size_t u = 0; u < n; ++u) {
    if (disc[u] < 0) dfs(u, static_cast<std::size_t>(-1));
  }
  return ranks;
}

// Atoms on the smallest cycle through `bond`: BFS between its ends without it.
std::size_t smallest_ring_through(const MolGraph& mol, std::size_t bond) {
  const Bond& b = mol.bonds()[bond];
  std::vector<int> dist(mol.atom_count(), -1);
  std::queue<std::size_t> q;
  dist[b.a] = 0;
  q.push(b.a);
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop();
    for (const auto& [v, e] : mol.neighbors(u)) {
      if (e == bond || dist[v] >= 0) continue;
      dist[v] = dist[u] + 1;
      if (v == b.b) return static_cast<std::size_t>(dist[v]) + 1;
      q.push(v);
    }
  }
  return 0;
}

}  // namespace

void FragmentTable::add(std::uint64_t environment, std::uint64_t count) {
  counts_[environment] += count;
  total_ += count;
}

std::uint64_t FragmentTable::count(std::uint64_t environment) const {
  auto it = counts_.find(environment);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<std::vector<std::uint64_t>> circular_environments(const MolGraph& mol, int max_radius) {
  const std::size_t n = mol.atom_count();
  const std::size_t nb = mol.bonds().size();
  auto in_ring = ring_atoms(mol);

  std::vector<std::uint64_t> current(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Atom& a = mol.atoms()[i];
    std::string inv = "r0|" + a.element + "|" + std::to_string(a.charge) + "|" + (a.aromatic ? "a" : "-") + "|" +
                      std::to_string(mol.degree(i)) + "|" + std::to_string(mol.total_h(i)) + "|" +
                      (in_ring[i] ? "R" : "-");
    current[i] = fnv1a64(inv);
  }
  std::vector<std::vector<std::uint64_t>> out(n);
  std::vector<bool> growing(n, true);
  // Atoms within the current radius and bonds covered, per center atom.
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  std::vector<std::vector<bool>> covered(n, std::vector<bool>(nb, false));
  for (std::size_t i = 0; i < n; ++i) {
    out[i].push_back(current[i]);
    reach[i][i] = true;
  }

  for (int r = 1; r <= max_radius; ++r) {
    std::vector<std::uint64_t> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::pair<int, std::uint64_t>> nbrs;
      for (const auto& [j, bond] : mol.neighbors(i)) {
        nbrs.emplace_back(static_cast<int>(mol.bonds()[bond].order), current[j]);
      }
      std::sort(nbrs.begin(), nbrs.end());
      std::string buf = "r" + std::to_string(r);
      append_u64(buf, current[i]);
      for (const auto& [order, h] : nbrs) {
        buf.push_back(static_cast<char>(order));
        append_u64(buf, h);
      }
      next[i] = fnv1a64(buf);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!growing[i]) continue;
      bool grew = false;
      std::vector<bool> new_reach = reach[i];
      for (std::size_t a = 0; a < n; ++a) {
        if (!reach[i][a]) continue;
        for (const auto& [j, bond] : mol.neighbors(a)) {
          if (!covered[i][bond]) {
            covered[i][bond] = true;
            grew = true;
          }
          new_reach[j] = true;
        }
      }
      reach[i] = std::move(new_reach);
      if (grew) {
        out[i].push_back(next[i]);
      } else {
        growing[i] = false;
      }
    }
    current = std::move(next);
  }
  return out;
}

FragmentTable build_fragment_table(std::span<const MolGraph> corpus) {
  if (corpus.empty()) throw std::invalid_argument("fragment table needs a non-empty corpus");
  FragmentTable table;
  for (const auto& mol : corpus) {
    for (const auto& envs : circular_environments(mol)) {
      for (std::uint64_t e : envs) table.add(e);
    }
  }
  return table;
}

RingComplexity ring_complexity(const MolGraph& mol) {
  RingComplexity rc;
  for (std::size_t rank : block_cycle_ranks(mol)) rc.fused = rc.fused || rank >= 2;
  auto rb = ring_bonds(mol);
  for (std::size_t b = 0; b < rb.size(); ++b) {
    if (rb[b]) rc.largest_smallest_ring = std::max(rc.largest_smallest_ring, smallest_ring_through(mol, b));
  }
  rc.macrocycle = rc.largest_smallest_ring > 8;
  return rc;
}

SaBreakdown sa_breakdown(const MolGraph& mol, const FragmentTable& table) {
  if (table.empty()) throw std::invalid_argument("fragment table is empty");
  SaBreakdown s;
  const double total = static_cast<double>(table.total());
  const double ceiling = std::log(total + 1.0);
  auto envs = circular_environments(mol);
  if (!envs.empty()) {
    double sum = 0.0;
    for (const auto& e : envs) {
      std::uint64_t c = table.count(e.back());
      double freq = c > 0 ? static_cast<double>(c) / total : 1.0 / (total + 1.0);
      sum += -std::log(freq);
    }
    s.fragment_rarity = std::clamp(6.0 * (sum / static_cast<double>(envs.size())) / ceiling, 0.0, 6.0);
  }
  RingComplexity rc = ring_complexity(mol);
  s.fused_penalty = rc.fused ? 0.5 : 0.0;
  s.macrocycle_penalty = rc.macrocycle ? 1.0 : 0.0;
  auto heavy = std::count_if(mol.atoms().begin(), mol.atoms().end(), [](const Atom& a) { return a.element != "H"; });
  double excess = std::max(0.0, static_cast<double>(heavy) - 30.0);
  s.size_penalty = 0.005 * excess * excess;
  s.stereo_penalty = mol.has_stereo() ? 0.5 : 0.0;
  double raw = s.fragment_rarity + s.fused_penalty + s.macrocycle_penalty + s.size_penalty + s.stereo_penalty;
  s.score = std::clamp(1.0 + raw, 1.0, 10.0);
  return s;
}

double sa_score(const MolGraph& mol, const FragmentTable& table) { return sa_breakdown(mol, table).score; }

}  // namespace mantra
