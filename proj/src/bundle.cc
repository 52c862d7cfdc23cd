#include "mantra/bundle.h"

#include <fstream>
#include <sstream>

#include "mantra/dataset_io.h"
#include "mantra/derivation.h"
#include "mantra/errors.h"
#include "mantra/mol_graph.h"

namespace mantra {

namespace {

void finish(Bundle& b) {
  if (b.weights.d != b.index.dim()) {
    throw FormatError("decoder expects d=" + std::to_string(b.weights.d) + " but the index has d=" +
                      std::to_string(b.index.dim()));
  }
  if (b.encoder.dim() != b.index.dim()) throw FormatError("encoder dimension does not match the index");
  if (b.weights.n_prod != b.grammar.rule_width()) throw FormatError("decoder width does not match the grammar");
  b.decoder = std::make_unique<GrammarLogitDecoder>(b.weights);
}

}  // namespace

std::filesystem::path sibling(const std::filesystem::path& path, const char* suffix) {
  std::filesystem::path p = path;
  p += suffix;
  return p;
}

std::unique_ptr<Bundle> build_bundle(std::vector<CompoundRecord> records, const Grammar& grammar,
                                     const BundleOptions& options) {
  if (records.empty()) throw std::invalid_argument("cannot build an index from an empty dataset");
  std::vector<MolGraph> mols;
  std::vector<RuleSequence> rules;
  mols.reserve(records.size());
  rules.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      rules.push_back(parse(records[i].smiles, grammar));
      mols.push_back(to_molgraph(records[i].smiles, grammar));
    } catch (const std::exception& e) {
      throw MoleculeError("row " + std::to_string(i + 1) + " ('" + records[i].id + "'): " + e.what());
    }
  }
  auto b = std::make_unique<Bundle>(Bundle{grammar, build_fragment_table(mols),
                                           ProjectionEncoder(options.d, options.nbits, options.seed), {}, {}, {}});
  b->weights = random_decoder_weights(grammar, options.d, options.t_max, options.hidden, options.seed);
  fit_rule_prior(b->weights, grammar, rules);
  b->index = build_index(std::move(records), b->encoder, b->table, b->grammar);
  finish(*b);
  return b;
}

void save_bundle(const Bundle& bundle, const std::filesystem::path& path) {
  save_index(bundle.index, path);
  save_fragment_table(bundle.table, sibling(path, ".frag"));
  save_decoder_weights(bundle.weights, sibling(path, ".decw"));
  std::ofstream out(sibling(path, ".enc"), std::ios::trunc);
  out << "projection " << bundle.encoder.dim() << ' ' << bundle.encoder.nbits() << ' ' << bundle.encoder.seed()
      << '\n';
  if (!out) throw std::runtime_error("failed writing " + sibling(path, ".enc").string());
}

std::unique_ptr<Bundle> load_bundle(const std::filesystem::path& path, const Grammar& grammar,
                                    const std::optional<std::filesystem::path>& weights) {
  auto enc_path = sibling(path, ".enc");
  std::ifstream in(enc_path);
  if (!in) throw std::runtime_error("cannot open " + enc_path.string());
  std::string kind, rest;
  std::size_t d = 0, nbits = 0;
  std::uint64_t seed = 0;
  if (!(in >> kind >> d >> nbits >> seed) || kind != "projection" || (in >> rest)) {
    throw FormatError("bad encoder description in " + enc_path.string());
  }
  auto b = std::make_unique<Bundle>(Bundle{grammar, load_fragment_table(sibling(path, ".frag")),
                                           ProjectionEncoder(d, nbits, seed), {}, {}, {}});
  b->weights = load_decoder_weights(weights.value_or(sibling(path, ".decw")));
  b->index = load_index(path, b->table, b->grammar);
  finish(*b);
  return b;
}

}  // namespace mantra
