#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "mantra/grammar.h"
#include "mantra/latent_index.h"
#include "mantra/latent_space.h"
#include "mantra/sa_score.h"

namespace mantra {

struct BundleOptions {
  std::size_t d = kDefaultLatentDim;
  std::size_t t_max = kDefaultTMax;
  std::size_t hidden = kDefaultHidden;
  std::size_t nbits = 2048;
  std::uint64_t seed = 7;
};

/// Everything a traversal needs, loaded once and shared read-only.
struct Bundle {
  Grammar grammar;
  FragmentTable table;
  ProjectionEncoder encoder;
  DecoderWeights weights;
  LatentIndex index;
  std::unique_ptr<GrammarLogitDecoder> decoder;
};

/// Fragment table, encoder and index from `records`; decoder weights seeded
/// from options.seed with the output bias fitted to the records' rule counts.
std::unique_ptr<Bundle> build_bundle(std::vector<CompoundRecord> records, const Grammar& grammar,
                                     const BundleOptions& options = {});

/// Writes `path` (index), `path`.frag, `path`.decw and `path`.enc.
void save_bundle(const Bundle& bundle, const std::filesystem::path& path);

/// Reads what save_bundle wrote. `weights` overrides `path`.decw.
std::unique_ptr<Bundle> load_bundle(const std::filesystem::path& path, const Grammar& grammar,
                                    const std::optional<std::filesystem::path>& weights = {});

std::filesystem::path sibling(const std::filesystem::path& path, const char* suffix);

}  // namespace mantra
