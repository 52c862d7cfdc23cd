#include "mantra/dataset_io.h"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "mantra/errors.h"

namespace mantra {

namespace {

constexpr char kFragMagic[8] = {'F', 'R', 'A', 'G', 'T', 'B', 'L', '1'};
constexpr char kIndexMagic[8] = {'L', 'I', 'D', 'X', '0', '0', '0', '1'};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(sep, start);
    out.push_back(line.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

std::string trim(std::string s) {
  const char* ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  s.erase(s.find_last_not_of(ws) + 1);
  return s;
}

std::optional<double> parse_double(const std::string& text) {
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw std::invalid_argument("bad activity value '" + text + "'");
  }
  return v;
}

void check_magic(std::istream& in, const char (&magic)[8], const char* what) {
  char buf[8];
  if (!in.read(buf, 8)) throw FormatError(std::string("truncated ") + what);
  if (std::memcmp(buf, magic, 8) != 0) {
    throw FormatError(std::string("not a ") + std::string(magic, 8) + " " + what + " (bad magic or version)");
  }
}

std::string format_activity(const std::optional<double>& a) {
  if (!a) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *a);
  return buf;
}

}  // namespace

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in, const char* what) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw FormatError(std::string("truncated ") + what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

DatasetLoad parse_dataset(std::istream& in, const Grammar& grammar) {
  DatasetLoad out;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("dataset is empty (expected header id,smiles,label,activity)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = split(trim(line), ',');
  for (auto& h : header) h = trim(h);
  if (header != std::vector<std::string>{"id", "smiles", "label", "activity"}) {
    throw FormatError("dataset header must be id,smiles,label,activity");
  }
  std::set<std::string> ids;
  std::map<std::string, std::size_t> smiles_line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cols = split(line, ',');
    std::string id = cols.empty() ? "" : trim(cols[0]);
    if (cols.size() != 4) {
      out.rejected.push_back({lineno, id,
                              cols.size() > 4 ? "row contains extra commas" : "row has fewer than 4 columns"});
      continue;
    }
    CompoundRecord r;
    r.id = id;
    r.smiles = trim(cols[1]);
    std::string label = trim(cols[2]);
    if (!label.empty()) r.label = label;
    if (r.id.empty()) {
      out.rejected.push_back({lineno, id, "empty id"});
      continue;
    }
    try {
      r.activity = parse_double(trim(cols[3]));
    } catch (const std::exception& e) {
      out.rejected.push_back({lineno, id, e.what()});
      continue;
    }
    ValidityReport v = validate_smiles(r.smiles, grammar);
    if (!v.valid) {
      std::string reason;
      for (const auto& s : v.reasons) reason += (reason.empty() ? "" : "; ") + s;
      out.rejected.push_back({lineno, id, reason});
      continue;
    }
    if (auto it = smiles_line.find(r.smiles); it != smiles_line.end()) {
      out.duplicates.push_back({lineno, id, "duplicate of line " + std::to_string(it->second)});
      continue;
    }
    if (!ids.insert(r.id).second) {
      out.rejected.push_back({lineno, id, "duplicate id"});
      continue;
    }
    smiles_line.emplace(r.smiles, lineno);
    out.records.push_back(std::move(r));
  }
  return out;
}

DatasetLoad load_dataset(const std::filesystem::path& path, const Grammar& grammar) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  return parse_dataset(in, grammar);
}

void save_fragment_table(const FragmentTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kFragMagic, 8);
  write_u64(out, table.size());
  for (const auto& [hash, count] : table.entries()) {
    write_u64(out, hash);
    write_u64(out, count);
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

FragmentTable load_fragment_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  check_magic(in, kFragMagic, "fragment table");
  std::uint64_t n = read_u64(in, "fragment table");
  FragmentTable t;
  std::uint64_t last = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint64_t hash = read_u64(in, "fragment table");
    std::uint64_t count = read_u64(in, "fragment table");
    if (i > 0 && hash <= last) throw FormatError("fragment table entries out of order");
    if (count == 0) throw FormatError("fragment table entry with zero count");
    t.add(hash, count);
    last = hash;
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in fragment table");
  return t;
}

void save_index(const LatentIndex& index, const std::filesystem::path& path) {
  for (const auto& r : index.records()) {
    for (const std::string* field : {&r.id, &r.smiles}) {
      if (field->find_first_of("\t\n\r") != std::string::npos) {
        throw std::invalid_argument("record field contains a tab or newline: '" + *field + "'");
      }
    }
    if (r.label && r.label->find_first_of("\t\n\r") != std::string::npos) {
      throw std::invalid_argument("label contains a tab or newline");
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kIndexMagic, 8);
  write_u64(out, index.dim());
  write_u64(out, index.size());
  const Matrix& c = index.coords();
  for (Eigen::Index i = 0; i < c.cols(); ++i) {
    for (Eigen::Index k = 0; k < c.rows(); ++k) {
      float f = static_cast<float>(c(k, i));
      if (static_cast<double>(f) != c(k, i)) throw std::invalid_argument("index coordinate is not float-exact");
      std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
      unsigned char buf[4];
      for (int b = 0; b < 4; ++b) buf[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xff);
      out.write(reinterpret_cast<const char*>(buf), 4);
    }
  }
  for (const auto& r : index.records()) {
    out << r.id << '\t' << r.smiles << '\t' << r.label.value_or("") << '\t' << format_activity(r.activity) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

LatentIndex load_index(const std::filesystem::path& path, const FragmentTable& table, const Grammar& grammar) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  check_magic(in, kIndexMagic, "latent index");
  std::uint64_t d = read_u64(in, "latent index");
  std::uint64_t n = read_u64(in, "latent index");
  if ((d == 0 && n != 0) || d > (1u << 20) || n > (1ULL << 32)) throw FormatError("implausible latent index dimensions");
  Matrix coords(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t k = 0; k < d; ++k) {
      unsigned char buf[4];
      if (!in.read(reinterpret_cast<char*>(buf), 4)) throw FormatError("truncated latent index coordinates");
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(buf[b]) << (8 * b);
      coords(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = std::bit_cast<float>(bits);
    }
  }
  std::vector<CompoundRecord> records;
  std::string line;
  while (records.size() < n && std::getline(in, line)) {
    if (in.eof()) throw FormatError("truncated latent index metadata");  // save_index ends every line
    auto f = split(line, '\t');
    if (f.size() != 4) throw FormatError("latent index metadata line " + std::to_string(records.size() + 1) +
                                         " has " + std::to_string(f.size()) + " fields");
    CompoundRecord r{f[0], f[1], std::nullopt, std::nullopt};
    if (!f[2].empty()) r.label = f[2];
    try {
      r.activity = parse_double(f[3]);
    } catch (const std::exception& e) {
      throw FormatError(e.what());
    }
    records.push_back(std::move(r));
  }
  if (records.size() != n) throw FormatError("truncated latent index metadata");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing data in latent index");
  if (n == 0) return LatentIndex(Matrix(static_cast<Eigen::Index>(d), 0), {}, table, grammar);
  return LatentIndex(std::move(coords), std::move(records), table, grammar);
}

}  // namespace mantra
