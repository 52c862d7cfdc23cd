#include <algorithm>
#include <functional>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "mantra/errors.h"
#include "mantra/fingerprint.h"
#include "mantra/heuristics.h"
#include "mantra/mol_graph.h"
#include "mantra/properties.h"
#include "mantra/sa_score.h"

using namespace mantra;

namespace {

MolGraph mol(const char* s) { return to_molgraph(s, default_grammar()); }

std::vector<int> hydrogens(const MolGraph& m) {
  std::vector<int> h;
  for (std::size_t i = 0; i < m.atom_count(); ++i) h.push_back(m.total_h(i));
  return h;
}

// Brute force: every sequence of distinct atoms with consecutive atoms bonded,
// canonicalized to the smaller of its two orientations.
std::set<std::vector<std::size_t>> brute_force_paths(const MolGraph& m, std::size_t max_atoms) {
  std::set<std::vector<std::size_t>> out;
  const std::size_t n = m.atom_count();
  std::vector<std::size_t> seq;
  std::function<void()> grow = [&] {
    if (!seq.empty()) {
      std::vector<std::size_t> rev(seq.rbegin(), seq.rend());
      out.insert(std::min(seq, rev));
    }
    if (seq.size() == max_atoms) return;
    for (std::size_t a = 0; a < n; ++a) {
      if (std::find(seq.begin(), seq.end(), a) != seq.end()) continue;
      if (!seq.empty() && !m.bond_between(seq.back(), a)) continue;
      seq.push_back(a);
      grow();
      seq.pop_back();
    }
  };
  grow();
  return out;
}

Fingerprint bits(std::size_t n, std::initializer_list<std::size_t> on) {
  Fingerprint f(n);
  for (auto b : on) f.set(b);
  return f;
}

const char* kSample[] = {"C",
                         "CCO",
                         "c1ccccc1",
                         "CC(=O)Oc1ccccc1C(=O)O",
                         "c1ccncc1",
                         "c1ccoc1",
                         "c1ccsc1",
                         "c1cc[nH]c1",
                         "c1ccc2ccccc2c1",
                         "C[N+](=O)[O-]",
                         "NS(=O)(=O)c1ccc(Cl)cc1",
                         "C1CCC2(CC1)CCC2",
                         "C1CCCCCCCCC1",
                         "C[C@H](N)C(=O)O",
                         "F/C=C/F",
                         "OCC#N",
                         "[Na+].[Cl-]",
                         "CCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCC",
                         "O=C(Nc1ccccc1)c1ccc(Br)cc1",
                         "CP(=O)(O)O"};

}  // namespace

TEST_CASE("to_molgraph builds atoms, bonds and hydrogens") {
  MolGraph ethanol = mol("CCO");
  CHECK(ethanol.atom_count() == 3);
  CHECK(ethanol.bonds().size() == 2);
  CHECK(hydrogens(ethanol) == std::vector<int>{3, 2, 1});
  CHECK(ethanol.atoms()[2].element == "O");

  MolGraph benzene = mol("c1ccccc1");
  CHECK(benzene.atom_count() == 6);
  REQUIRE(benzene.bonds().size() == 6);
  for (const auto& b : benzene.bonds()) CHECK(b.order == BondOrder::kAromatic);
  CHECK(hydrogens(benzene) == std::vector<int>(6, 1));
  for (const auto& a : benzene.atoms()) CHECK(a.aromatic);
}

TEST_CASE("aromatic and charged valence bookkeeping") {
  CHECK(hydrogens(mol("c1ccncc1")) == std::vector<int>{1, 1, 1, 0, 1, 1});
  CHECK(hydrogens(mol("c1ccoc1")) == std::vector<int>{1, 1, 1, 0, 1});
  CHECK(hydrogens(mol("c1cc[nH]c1")) == std::vector<int>{1, 1, 1, 1, 1});
  CHECK(hydrogens(mol("c1ccc2ccccc2c1")) == std::vector<int>{1, 1, 1, 0, 1, 1, 1, 1, 0, 1});
  CHECK(hydrogens(mol("C[N+](=O)[O-]")) == std::vector<int>{3, 0, 0, 0});
  CHECK(hydrogens(mol("NS(=O)(=O)C")) == std::vector<int>{2, 0, 0, 0, 3});
  CHECK(hydrogens(mol("C=C")) == std::vector<int>{2, 2});
  CHECK(hydrogens(mol("C#N")) == std::vector<int>{1, 0});
  CHECK(hydrogens(mol("[CH4]")) == std::vector<int>{4});
}

TEST_CASE("to_molgraph errors") {
  try {
    mol("C(C)(C)(C)(C)C");
    FAIL("expected valence violation");
  } catch (const MoleculeError& e) {
    CHECK(e.atoms() == std::vector<std::size_t>{0});
  }
  CHECK_THROWS_AS(mol("C(((") , ParseError);
  CHECK_THROWS_WITH_AS(mol("C1CC"), doctest::Contains("unpaired ring digit 1"), MoleculeError);
  CHECK_THROWS_AS(mol("C11"), MoleculeError);
  CHECK_THROWS_AS(mol("C1C1"), MoleculeError);
  CHECK_THROWS_AS(mol("O=O=O"), MoleculeError);
}

TEST_CASE("validate") {
  CHECK(validate(mol("CC")).valid);
  ValidityReport lone = validate(mol("c"));
  CHECK_FALSE(lone.valid);
  REQUIRE(lone.reasons.size() == 1);
  CHECK(lone.reasons[0].find("acyclic aromatic") != std::string::npos);

  ValidityReport broken = validate_smiles("c1ccccc1C2CCCC", default_grammar());
  CHECK_FALSE(broken.valid);
  REQUIRE(broken.reasons.size() == 1);
  CHECK(broken.reasons[0] == "unpaired ring digit 2");
  CHECK(validate_smiles("c1ccccc1C2CCCC2", default_grammar()).valid);
  CHECK_FALSE(validate_smiles("xyz!!", default_grammar()).valid);
  CHECK_FALSE(validate_smiles("C(C)(C)(C)(C)C", default_grammar()).valid);
  for (const char* s : kSample) CHECK_MESSAGE(validate_smiles(s, default_grammar()).valid, s);
}

TEST_CASE("graph construction invariants") {
  MolGraph m;
  auto a = m.add_atom(Atom{"C"});
  auto b = m.add_atom(Atom{"C"});
  m.add_bond(a, b, BondOrder::kSingle);
  CHECK_THROWS_AS(m.add_bond(a, b, BondOrder::kDouble), MoleculeError);
  CHECK_THROWS_AS(m.add_bond(a, a, BondOrder::kSingle), MoleculeError);
  CHECK_THROWS_AS(m.add_bond(a, 7, BondOrder::kSingle), MoleculeError);
}

TEST_CASE("molecular weight against hand mass summation") {
  const double c = 12.011, h = 1.008, o = 15.999;
  CHECK(molecular_weight(mol("C")) == doctest::Approx(c + 4 * h).epsilon(1e-12));
  CHECK(std::abs(molecular_weight(mol("C")) - 16.043) < 0.005);
  CHECK(std::abs(molecular_weight(mol("CCO")) - (2 * c + o + 6 * h)) < 1e-9);
  CHECK(std::abs(molecular_weight(mol("CCO")) - 46.069) < 0.005);
  CHECK(std::abs(molecular_weight(mol("c1ccccc1")) - (6 * c + 6 * h)) < 1e-9);
  CHECK(std::abs(molecular_weight(mol("c1ccccc1")) - 78.114) < 0.005);

  MolGraph odd;
  odd.add_atom(Atom{"Xx", 0, false, 0});
  CHECK_THROWS_AS(molecular_weight(odd), MoleculeError);
}

TEST_CASE("molecular weight is additive over disconnected components") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const char* a = kSample[rng() % std::size(kSample)];
    const char* b = kSample[rng() % std::size(kSample)];
    std::string joined = std::string(a) + "." + b;
    double sum = molecular_weight(mol(a)) + molecular_weight(mol(b));
    CHECK(molecular_weight(mol(joined.c_str())) == doctest::Approx(sum).epsilon(1e-12));
  }
}

TEST_CASE("path enumeration matches brute force") {
  for (const char* s : {"C", "CCO", "c1ccccc1", "CC(C)(C)O", "C1CC1C", "c1ccoc1", "OC(=O)CN", "C1CC2CC12"}) {
    MolGraph m = mol(s);
    REQUIRE(m.atom_count() <= 8);
    for (std::size_t len : {1, 2, 4, 7}) {
      auto fast = enumerate_paths(m, len);
      std::set<std::vector<std::size_t>> fast_set(fast.begin(), fast.end());
      CHECK(fast_set.size() == fast.size());
      CHECK(fast_set == brute_force_paths(m, len));
    }
  }
}

TEST_CASE("fingerprint behaviour") {
  CHECK(fingerprint(mol("C")).popcount() == 1);
  Fingerprint cc = fingerprint(mol("CC"));
  Fingerprint cco = fingerprint(mol("CCO"));
  for (auto b : cc.on_bits()) CHECK(cco.test(b));
  CHECK(fingerprint(mol("c1ccccc1")) == fingerprint(mol("c1ccccc1")));
  CHECK(fingerprint(mol("CCO"), 64).nbits() == 64);
  CHECK_THROWS_AS(fingerprint(mol("C"), 100), std::invalid_argument);
  CHECK_THROWS_AS(fingerprint(mol("C"), 64, 0), std::invalid_argument);
  // Both directed readings serialize to the same key.
  MolGraph m = mol("CCO");
  CHECK(path_key(m, {0, 1, 2}) == path_key(m, {2, 1, 0}));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("tanimoto and cosine") {
  Fingerprint a = bits(64, {1, 2, 3, 4});
  Fingerprint b = bits(64, {3, 4, 5, 6});
  CHECK(tanimoto(a, a) == 1.0);
  CHECK(tanimoto(bits(64, {1}), bits(64, {2})) == 0.0);
  CHECK(tanimoto(a, b) == doctest::Approx(2.0 / 6.0));
  CHECK(tanimoto(Fingerprint(64), Fingerprint(64)) == 0.0);
  CHECK_THROWS_AS(tanimoto(Fingerprint(64), Fingerprint(128)), std::invalid_argument);

  CHECK(cosine_similarity(a, a) == 1.0);
  CHECK(cosine_similarity(bits(64, {1}), bits(64, {2})) == 0.0);
  CHECK(cosine_similarity(bits(64, {1, 2}), bits(64, {2})) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(cosine_similarity(Fingerprint(64), Fingerprint(64)) == 0.0);
  CHECK_THROWS_AS(cosine_similarity(Fingerprint(64), Fingerprint(128)), std::invalid_argument);

  std::mt19937 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    Fingerprint x(128), y(128);
    for (int k = 0; k < 20; ++k) {
      x.set(rng() % 128);
      y.set(rng() % 128);
    }
    CHECK(tanimoto(x, y) == tanimoto(y, x));
    CHECK(cosine_similarity(x, y) == cosine_similarity(y, x));
    CHECK(tanimoto(x, y) >= 0.0);
    CHECK(tanimoto(x, y) <= 1.0);
    CHECK(cosine_similarity(x, y) <= 1.0);
    CHECK(tanimoto(x, x) == 1.0);
  }
}

TEST_CASE("fragment table") {
  std::vector<MolGraph> one{mol("C")};
  FragmentTable t = build_fragment_table(one);
  CHECK(t.size() == 1);
  CHECK(t.total() == 1);
  CHECK(t.entries().begin()->second == 1);

  std::vector<MolGraph> single{mol("CC")};
  std::vector<MolGraph> twice{mol("CC"), mol("CC")};
  FragmentTable a = build_fragment_table(single);
  FragmentTable b = build_fragment_table(twice);
  CHECK(a.size() == b.size());
  for (auto& [hash, count] : a.entries()) CHECK(b.count(hash) == 2 * count);
  CHECK_THROWS_AS(build_fragment_table(std::vector<MolGraph>{}), std::invalid_argument);
}

TEST_CASE("circular environments stop when no new bonds are covered") {
  auto methane = circular_environments(mol("C"));
  CHECK(methane.size() == 1);
  CHECK(methane[0].size() == 1);
  auto ethane = circular_environments(mol("CC"));
  CHECK(ethane[0].size() == 2);
  CHECK(ethane[0] == ethane[1]);
  auto propane = circular_environments(mol("CCC"));
  CHECK(propane[0].size() == 3);
  CHECK(propane[1].size() == 2);
}

TEST_CASE("ring complexity") {
  CHECK(ring_complexity(mol("c1ccc2ccccc2c1")).fused);
  CHECK_FALSE(ring_complexity(mol("c1ccccc1")).fused);
  CHECK_FALSE(ring_complexity(mol("C1CCC2(CC1)CCC2")).fused);  // spiro shares one atom
  CHECK(ring_complexity(mol("C1CC2CCC1C2")).fused);           // bridged
  CHECK(ring_complexity(mol("C1CCCCCCCCC1")).macrocycle);
  CHECK_FALSE(ring_complexity(mol("c1ccc2ccccc2c1")).macrocycle);
  CHECK(ring_complexity(mol("c1ccc2ccccc2c1")).largest_smallest_ring == 6);
}

TEST_CASE("sa_score") {
  std::vector<MolGraph> corpus{mol("C")};
  FragmentTable t = build_fragment_table(corpus);
  double methane = sa_score(mol("C"), t);
  CHECK(methane >= 1.0);
  CHECK(methane <= 2.0);
  CHECK(sa_breakdown(mol("C"), t).fragment_rarity == 0.0);
  CHECK_THROWS_AS(sa_score(mol("C"), FragmentTable{}), std::invalid_argument);

  std::vector<MolGraph> sample;
  for (const char* s : kSample) sample.push_back(mol(s));
  FragmentTable big = build_fragment_table(sample);
  for (const auto& m : sample) {
    double s = sa_score(m, big);
    CHECK(s >= 1.0);
    CHECK(s <= 10.0);
  }
  // Unseen environments are maximally rare.
  CHECK(sa_breakdown(mol("CCO"), t).fragment_rarity == doctest::Approx(6.0));
  SaBreakdown chiral = sa_breakdown(mol("C[C@H](N)C(=O)O"), big);
  CHECK(chiral.stereo_penalty == 0.5);
  CHECK(sa_breakdown(mol("C1CCCCCCCCC1"), big).macrocycle_penalty == 1.0);
  SaBreakdown chain = sa_breakdown(mol("CCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCC"), big);
  CHECK(chain.size_penalty == doctest::Approx(0.005 * 36));
}

TEST_CASE("drug_likeness") {
  CHECK(drug_likeness(mol("C")) == 1.0);
  LipinskiCounts heavy{700.0, 0, 0, 0};
  CHECK(drug_likeness(heavy) == 0.75);
  CHECK(ramp_down(600.0, 500.0, 700.0) == doctest::Approx(0.5));

  double last = 1.0;
  std::string chain = "C";
  for (int i = 0; i < 60; ++i) {
    chain += "C(Br)";
    double s = ramp_down(molecular_weight(mol(chain.c_str())), 500.0, 700.0);
    CHECK(s <= last);
    last = s;
  }
  CHECK(last == 0.0);

  LipinskiCounts counts = lipinski_counts(mol("CC(=O)Oc1ccccc1C(=O)O"));
  CHECK(counts.h_donors == 1);
  CHECK(counts.h_acceptors == 4);
  CHECK(counts.rotatable_bonds == 3);
  for (const char* s : kSample) {
    double d = drug_likeness(mol(s));
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
  }
}

TEST_CASE("activity_class") {
  CHECK(activity_class(4.9) == ActivityClass::kInactive);
  CHECK(activity_class(6.0) == ActivityClass::kIntermediate);
  CHECK(activity_class(7.5) == ActivityClass::kActive);
  CHECK(activity_class(5.0) == ActivityClass::kIntermediate);
  CHECK(activity_class(7.0) == ActivityClass::kIntermediate);
  CHECK_THROWS_AS(activity_class(std::nan("")), std::invalid_argument);
  int last = 0;
  for (double x = 0.0; x < 12.0; x += 0.01) {
    int r = rank(activity_class(x));
    CHECK(r >= last);
    last = r;
  }
}

TEST_CASE("heuristic_distance") {
  std::vector<MolGraph> corpus;
  for (const char* s : kSample) corpus.push_back(mol(s));
  FragmentTable t = build_fragment_table(corpus);

  CompoundProperties a = compute_properties(mol("CCO"), t, 4.0);
  HeuristicVector self = heuristic_distance(a, a);
  CHECK(self.fingerprint_dist == 0.0);
  CHECK(self.sa_dist == 0.0);
  CHECK(self.druglike_dist == 0.0);
  CHECK(self.activity_dist == 0.0);
  CHECK_FALSE(self.activity_missing);

  CompoundProperties lo = a, hi = a;
  lo.sa = 1.0;
  hi.sa = 10.0;
  CHECK(heuristic_distance(lo, hi).sa_dist == 1.0);
  lo.activity = 4.0;
  hi.activity = 8.0;
  CHECK(heuristic_distance(lo, hi).activity_dist == 1.0);
  hi.activity.reset();
  HeuristicVector missing = heuristic_distance(lo, hi);
  CHECK(missing.activity_missing);
  CHECK(missing.activity_dist == 0.0);

  std::vector<CompoundProperties> props;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    props.push_back(compute_properties(corpus[i], t, i % 3 ? std::optional<double>(3.0 + i * 0.4) : std::nullopt));
  }
  for (const auto& x : props) {
    for (const auto& y : props) {
      HeuristicVector h = heuristic_distance(x, y);
      HeuristicVector g = heuristic_distance(y, x);
      CHECK(h.fingerprint_dist == g.fingerprint_dist);
      CHECK(h.sa_dist == g.sa_dist);
      CHECK(h.druglike_dist == g.druglike_dist);
      CHECK(h.activity_dist == g.activity_dist);
      for (double v : {h.fingerprint_dist, h.sa_dist, h.druglike_dist, h.activity_dist}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
  HeuristicWeights w{1.0, 2.0, 0.0, 0.5};
  HeuristicVector h{0.5, 0.25, 1.0, 1.0, false};
  CHECK(weighted_sum(h, w) == doctest::Approx(0.5 + 0.5 + 0.5));
}
