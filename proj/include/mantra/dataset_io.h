#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mantra/grammar.h"
#include "mantra/latent_index.h"
#include "mantra/sa_score.h"

namespace mantra {

struct RowIssue {
  std::size_t line = 0;  // 1-based line in the file, header is line 1
  std::string id;
  std::string reason;
};

struct DatasetLoad {
  std::vector<CompoundRecord> records;
  std::vector<RowIssue> rejected;
  std::vector<RowIssue> duplicates;
};

/// Reads `id,smiles,label,activity` CSV. Bad rows are reported and skipped;
/// repeated SMILES keep the first row. Throws FormatError on a bad header.
DatasetLoad parse_dataset(std::istream& in, const Grammar& grammar);
DatasetLoad load_dataset(const std::filesystem::path& path, const Grammar& grammar);

/// "FRAGTBL1", u64 entry count, then (u64 hash, u64 count) pairs by hash.
void save_fragment_table(const FragmentTable& table, const std::filesystem::path& path);
FragmentTable load_fragment_table(const std::filesystem::path& path);

/// "LIDX0001", u64 d, u64 count, count * d float32 coordinates (record
/// major), then one tab-separated `id smiles label activity` line per record.
void save_index(const LatentIndex& index, const std::filesystem::path& path);
LatentIndex load_index(const std::filesystem::path& path, const FragmentTable& table, const Grammar& grammar);

/// Bit-level stream helpers shared by the binary formats. Little-endian.
void write_u64(std::ostream& out, std::uint64_t v);
std::uint64_t read_u64(std::istream& in, const char* what);

}  // namespace mantra
