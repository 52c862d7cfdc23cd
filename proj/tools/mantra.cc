#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "mantra/bundle.h"
#include "mantra/dataset_io.h"
#include "mantra/derivation.h"
#include "mantra/errors.h"
#include "mantra/json_api.h"
#include "mantra/mol_graph.h"
#include "mantra/service.h"

using namespace mantra;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kUsage = 2, kIo = 3, kDisconnected = 4 };

struct EndpointFlags {
  std::string label, id, coords;
};

Grammar grammar_from(const std::string& path) { return path.empty() ? default_grammar() : load_grammar_file(path); }

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (const auto& s : parts) out += (out.empty() ? "" : sep) + s;
  return out;
}

Endpoint endpoint_from(const EndpointFlags& f, const char* which) {
  int given = !f.label.empty() + !f.id.empty() + !f.coords.empty();
  std::string w = which;
  if (given != 1) {
    throw RequestError("give exactly one of --" + w + "-label, --" + w + "-id or --" + w + "-coords");
  }
  if (!f.label.empty()) return Endpoint::of_label(f.label);
  if (!f.id.empty()) return Endpoint::of_record(f.id);
  std::vector<double> values;
  std::stringstream ss(f.coords);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw RequestError("--" + w + "-coords must be comma-separated numbers, got '" + item + "'");
    }
  }
  Vector z(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) z(static_cast<Eigen::Index>(i)) = values[i];
  return Endpoint::at(std::move(z));
}

std::string fixed(const std::optional<double>& v, int decimals) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
  return buf;
}

void print_summary(std::ostream& out, const TraversalResult& r) {
  char line[512];
  std::snprintf(line, sizeof line, "%-4s %-4s %-5s %-6s %-12s %-5s %-7s %-14s %s\n", "path", "step", "valid", "novel",
                "activity", "SA", "MW", "label", "compound");
  out << line;
  std::set<std::string> seen;
  for (std::size_t p = 0; p < r.paths.size(); ++p) {
    const auto& cs = r.paths[p].compounds;
    for (std::size_t s = 0; s < cs.size(); ++s) {
      const GeneratedCompound& c = cs[s];
      if (!c.complete || !seen.insert(c.text).second) continue;
      std::string activity = c.potential_activity ? std::string(to_string(activity_class(*c.potential_activity))) : "-";
      std::string smiles = c.text.size() > 70 ? c.text.substr(0, 67) + "..." : c.text;
      std::snprintf(line, sizeof line, "%-4zu %-4zu %-5s %-6s %-12s %-5s %-7s %-14s %s\n", p, s,
                    c.valid ? "yes" : "no", c.novel ? "yes" : "no", activity.c_str(), fixed(c.sa, 2).c_str(),
                    fixed(c.molecular_weight, 1).c_str(), c.potential_label.label.value_or("-").c_str(),
                    smiles.c_str());
      out << line;
    }
  }
  const TraversalStats& st = r.stats;
  out << r.paths.size() << " paths, " << st.total << " decodes: " << st.complete << " complete, " << st.valid
      << " valid, " << st.novel << " novel, " << st.unique_complete_novel << " unique complete novel, "
      << st.unique_valid_novel << " unique valid novel\n";
}

int cmd_parse(const std::string& smiles, const std::string& grammar_path) {
  Grammar g = grammar_from(grammar_path);
  RuleSequence rules = parse(smiles, g);
  std::vector<std::string> ids;
  for (std::size_t id : rules.rule_ids) ids.push_back(std::to_string(id));
  std::cout << join(ids, " ") << '\n';
  ValidityReport v = validate_smiles(smiles, g);
  if (!v.valid) {
    std::cout << "invalid: " << join(v.reasons, "; ") << '\n';
    return kInvalid;
  }
  std::cout << "valid\n";
  return kOk;
}

int cmd_derive(const std::vector<std::string>& args, const std::string& grammar_path) {
  Grammar g = grammar_from(grammar_path);
  std::vector<std::size_t> ids;
  for (const auto& arg : args) {
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      std::size_t used = 0;
      unsigned long v = 0;
      try {
        v = std::stoul(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size() || item[0] == '-') throw RequestError("rule ids must be non-negative integers, got '" + item + "'");
      ids.push_back(v);
    }
  }
  Derivation d = derive(ids, g);
  std::cout << d.text << '\n';
  if (!d.complete) {
    std::cerr << "incomplete derivation: " << d.pending.size() << " symbols pending\n";
    return kInvalid;
  }
  return kOk;
}

int cmd_validate(const std::string& path, const std::string& grammar_path) {
  Grammar g = grammar_from(grammar_path);
  DatasetLoad d = load_dataset(path, g);
  for (const auto& r : d.rejected) std::cout << "line " << r.line << " (" << r.id << "): " << r.reason << '\n';
  for (const auto& r : d.duplicates) std::cout << "line " << r.line << " (" << r.id << "): " << r.reason << '\n';
  std::cout << d.records.size() << " valid, " << d.rejected.size() << " rejected, " << d.duplicates.size()
            << " duplicates\n";
  return d.rejected.empty() ? kOk : kInvalid;
}

int cmd_build(const std::string& data, const std::string& out, const BundleOptions& opt, bool skip_invalid,
              const std::string& grammar_path) {
  Grammar g = grammar_from(grammar_path);
  DatasetLoad d = load_dataset(data, g);
  for (const auto& r : d.rejected) std::cerr << "line " << r.line << " (" << r.id << "): " << r.reason << '\n';
  if (!d.rejected.empty() && !skip_invalid) {
    std::cerr << d.rejected.size() << " invalid rows; nothing written (use --skip-invalid to drop them)\n";
    return kInvalid;
  }
  if (d.records.empty()) {
    std::cerr << "no valid records in " << data << '\n';
    return kInvalid;
  }
  auto bundle = build_bundle(std::move(d.records), g, opt);
  save_bundle(*bundle, out);
  std::cout << "indexed " << bundle->index.size() << " records (d=" << bundle->index.dim() << ") into " << out
            << '\n';
  return kOk;
}

int cmd_traverse(const TraversalRequest& req, const std::string& index, const std::string& weights,
                 const std::string& out, const std::string& grammar_path) {
  check_request(req);
  Grammar g = grammar_from(grammar_path);
  auto bundle = load_bundle(index, g, weights.empty() ? std::nullopt : std::optional<fs::path>(weights));
  const Bundle& b = *bundle;
  Navigator nav({b.index, *b.decoder, *b.decoder, b.grammar, b.table});
  TraversalResult result = nav.traverse(req);
  Json body = {{"request", to_json(req)}};
  body.update(to_json(result, b.index));
  std::string text = body.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return kOk;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw std::runtime_error("failed writing " + out);
  print_summary(std::cout, result);
  return kOk;
}

int cmd_encode(const std::string& smiles, const std::string& index, const std::string& grammar_path) {
  Grammar g = grammar_from(grammar_path);
  ValidityReport v = validate_smiles(smiles, g);
  if (!v.valid) {
    std::cerr << "invalid smiles: " << join(v.reasons, "; ") << '\n';
    return kInvalid;
  }
  auto b = load_bundle(index, g);
  std::cout << Json{{"coords", to_json(b->encoder.encode(to_molgraph(smiles, g)))}}.dump() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-space traversal for molecule generation"};
  app.require_subcommand(1);
  std::string grammar_path;
  app.add_option("--grammar", grammar_path, "Grammar file (default: built-in SMILES grammar)");

  std::string smiles;
  auto* parse_cmd = app.add_subcommand("parse", "Print the rule ids of a SMILES string and its validity");
  parse_cmd->add_option("smiles", smiles, "SMILES string")->required();

  std::vector<std::string> ids;
  auto* derive_cmd = app.add_subcommand("derive", "Replay rule ids (space or comma separated) into a string");
  derive_cmd->add_option("ids", ids, "Rule ids")->required();

  std::string data;
  auto* validate_cmd = app.add_subcommand("validate", "Check every row of a dataset CSV");
  validate_cmd->add_option("file", data, "CSV with header id,smiles,label,activity")->required();

  std::string out;
  BundleOptions bopt;
  bool skip_invalid = false;
  auto* build_cmd = app.add_subcommand("build-index", "Build the latent index, fragment table and decoder weights");
  build_cmd->add_option("--data", data, "Dataset CSV")->required();
  build_cmd->add_option("--out", out, "Index path; .frag, .decw and .enc are written beside it")->required();
  build_cmd->add_option("--seed", bopt.seed, "Seed for encoder and decoder weights")->capture_default_str();
  build_cmd->add_option("--dim", bopt.d, "Latent dimension")->capture_default_str()->check(CLI::PositiveNumber);
  build_cmd->add_option("--t-max", bopt.t_max, "Decoder steps")->capture_default_str()->check(CLI::PositiveNumber);
  build_cmd->add_option("--hidden", bopt.hidden, "Decoder hidden width")->capture_default_str()->check(CLI::PositiveNumber);
  build_cmd->add_option("--nbits", bopt.nbits, "Fingerprint bits fed to the encoder")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  build_cmd->add_flag("--skip-invalid", skip_invalid, "Drop invalid rows instead of failing");

  TraversalRequest req;
  EndpointFlags src, dst;
  std::string index, weights, mode = "yen";
  auto* trav_cmd = app.add_subcommand("traverse", "Generate compounds along latent paths between two endpoints");
  trav_cmd->add_option("--index", index, "Index written by build-index")->required();
  trav_cmd->add_option("--weights", weights, "Decoder weights (default: <index>.decw)");
  trav_cmd->add_option("--source-label", src.label, "Start at the centroid of a label");
  trav_cmd->add_option("--source-id", src.id, "Start at a record");
  trav_cmd->add_option("--source-coords", src.coords, "Start at comma-separated coordinates");
  trav_cmd->add_option("--dest-label", dst.label, "End at the centroid of a label");
  trav_cmd->add_option("--dest-id", dst.id, "End at a record");
  trav_cmd->add_option("--dest-coords", dst.coords, "End at comma-separated coordinates");
  trav_cmd->add_option("--m", req.m, "Points per path")->capture_default_str();
  trav_cmd->add_option("--n", req.n, "Neighbours per node")->capture_default_str();
  trav_cmd->add_option("--k", req.k, "Number of paths")->capture_default_str();
  trav_cmd->add_option("--w-jac", req.weights.jacobian, "Weight on the Jacobian term")->capture_default_str();
  trav_cmd->add_option("--w-fp", req.weights.heuristics.fingerprint, "Weight on fingerprint distance")
      ->capture_default_str();
  trav_cmd->add_option("--w-sa", req.weights.heuristics.sa, "Weight on SA distance")->capture_default_str();
  trav_cmd->add_option("--w-dl", req.weights.heuristics.druglike, "Weight on drug-likeness distance")
      ->capture_default_str();
  trav_cmd->add_option("--w-act", req.weights.heuristics.activity, "Weight on activity distance")
      ->capture_default_str();
  trav_cmd->add_option("--mode", mode, "yen, perturb or vary_m")->capture_default_str();
  trav_cmd->add_option("--sigma", req.sigma, "Endpoint perturbation scale (perturb mode)")->capture_default_str();
  trav_cmd->add_option("--seed", req.seed, "Perturbation seed")->capture_default_str();
  trav_cmd->add_option("--astar-lambda", req.astar_lambda, "Euclidean A* heuristic scale, 0 for Dijkstra")
      ->capture_default_str();
  trav_cmd->add_option("--label-k", req.label_k, "Neighbours voting on a potential label")->capture_default_str();
  trav_cmd->add_option("--out", out, "Write JSON here and print a summary table (default: JSON to stdout)");

  auto* encode_cmd = app.add_subcommand("encode", "Print the latent coordinates of a SMILES string");
  encode_cmd->add_option("smiles", smiles, "SMILES string")->required();
  encode_cmd->add_option("--index", index, "Index whose encoder to use")->required();

  ServiceConfig scfg;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP JSON API (PORT, INDEX_PATH, GRAMMAR_PATH, WEIGHTS_PATH)");
  serve_cmd->add_option("--index", index, "Index written by build-index");
  serve_cmd->add_option("--weights", weights, "Decoder weights (default: <index>.decw)");
  serve_cmd->add_option("--host", scfg.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", scfg.port, "Port, 0 for any")->capture_default_str()->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*parse_cmd) return cmd_parse(smiles, grammar_path);
    if (*derive_cmd) return cmd_derive(ids, grammar_path);
    if (*validate_cmd) return cmd_validate(data, grammar_path);
    if (*build_cmd) return cmd_build(data, out, bopt, skip_invalid, grammar_path);
    if (*encode_cmd) return cmd_encode(smiles, index, grammar_path);
    if (*trav_cmd) {
      req.mode = parse_mode(mode);
      req.source = endpoint_from(src, "source");
      req.destination = endpoint_from(dst, "dest");
      return cmd_traverse(req, index, weights, out, grammar_path);
    }
    if (*serve_cmd) {
      ServiceConfig c = ServiceConfig::from_env(scfg);
      if (serve_cmd->count("--port")) c.port = scfg.port;
      if (!index.empty()) c.index_path = index;
      if (!weights.empty()) c.weights_path = weights;
      if (!grammar_path.empty()) c.grammar_path = grammar_path;
      if (c.index_path.empty()) throw RequestError("no index given (--index or INDEX_PATH)");
      return serve(c) ? kOk : kIo;
    }
  } catch (const RequestError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NoPathError& e) {
    std::cerr << "disconnected endpoints: " << e.what() << '\n';
    return kDisconnected;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kInvalid;
  } catch (const DeriveError& e) {
    std::cerr << "derive error: " << e.what() << '\n';
    return kInvalid;
  } catch (const MoleculeError& e) {
    std::cerr << "invalid molecule: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}
