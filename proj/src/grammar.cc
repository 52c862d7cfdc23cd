#include "mantra/grammar.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mantra/errors.h"

namespace mantra {

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

struct RawSymbol {
  std::string text;
  bool quoted;
};

struct RawLine {
  std::size_t line;
  std::string lhs;
  std::vector<RawSymbol> rhs;
};

// Splits one grammar line into symbols. Returns false for blank/comment lines.
bool split_line(std::string_view line, std::size_t lineno, RawLine& out) {
  std::vector<RawSymbol> words;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '#') {
      break;
    } else if (c == '\'') {
      std::size_t close = line.find('\'', i + 1);
      if (close == std::string_view::npos) throw GrammarError("unterminated quoted terminal", lineno);
      if (close == i + 1) throw GrammarError("empty terminal ''", lineno);
      words.push_back({std::string(line.substr(i + 1, close - i - 1)), true});
      i = close + 1;
      if (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != '#') {
        throw GrammarError("expected whitespace after terminal", lineno);
      }
    } else {
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && line[j] != '#' &&
             line[j] != '\'') {
        ++j;
      }
      words.push_back({std::string(line.substr(i, j - i)), false});
      i = j;
    }
  }
  if (words.empty()) return false;
  if (words.size() < 2 || words[1].quoted || words[1].text != "->") {
    throw GrammarError("syntax error: expected 'NonTerminal -> symbols'", lineno);
  }
  if (words[0].quoted || !is_identifier(words[0].text) || words[0].text == "EPS") {
    throw GrammarError("syntax error: left-hand side must be a bare identifier", lineno);
  }
  out.line = lineno;
  out.lhs = words[0].text;
  out.rhs.assign(words.begin() + 2, words.end());
  if (out.rhs.empty()) throw GrammarError("syntax error: empty right-hand side (use EPS)", lineno);
  for (const auto& w : out.rhs) {
    if (w.quoted) continue;
    if (w.text == "EPS") {
      if (out.rhs.size() != 1) throw GrammarError("EPS must be the only right-hand-side symbol", lineno);
    } else if (w.text == "->") {
      throw GrammarError("syntax error: repeated '->'", lineno);
    } else if (!is_identifier(w.text)) {
      throw GrammarError("syntax error: bad symbol '" + w.text + "'", lineno);
    }
  }
  return true;
}

}  // namespace

Grammar Grammar::from_parts(std::vector<std::string> nonterminals, std::vector<std::string> terminals,
                            std::vector<Production> productions, std::uint32_t start_symbol) {
  if (nonterminals.empty()) throw GrammarError("grammar has no nonterminals");
  if (productions.empty()) throw GrammarError("grammar has no productions");
  if (start_symbol >= nonterminals.size()) throw GrammarError("start symbol out of range");
  {
    std::set<std::string> seen;
    for (const auto& n : nonterminals) {
      if (!seen.insert(n).second) throw GrammarError("duplicate nonterminal '" + n + "'");
    }
    seen.clear();
    for (const auto& t : terminals) {
      if (t.empty()) throw GrammarError("empty terminal");
      if (!seen.insert(t).second) throw GrammarError("duplicate terminal '" + t + "'");
    }
  }
  for (std::size_t p = 0; p < productions.size(); ++p) {
    const auto& prod = productions[p];
    if (prod.lhs >= nonterminals.size()) {
      throw GrammarError("production " + std::to_string(p) + " has an unregistered left-hand side");
    }
    for (const auto& s : prod.rhs) {
      std::size_t limit = s.is_terminal() ? terminals.size() : nonterminals.size();
      if (s.index >= limit) {
        throw GrammarError("unknown symbol in production " + std::to_string(p));
      }
    }
    for (std::size_t q = 0; q < p; ++q) {
      if (productions[q] == prod) throw GrammarError("duplicate production " + std::to_string(p));
    }
  }

  Grammar g;
  g.nonterminals_ = std::move(nonterminals);
  g.terminals_ = std::move(terminals);
  g.productions_ = std::move(productions);
  g.start_ = start_symbol;
  g.build_tables();
  return g;
}

void Grammar::build_tables() {
  const std::size_t nn = nonterminals_.size();
  const std::size_t nt = terminals_.size();
  const std::size_t end = nt;

  alternatives_.assign(nn, {});
  for (std::size_t p = 0; p < productions_.size(); ++p) alternatives_[productions_[p].lhs].push_back(p);

  // Every nonterminal reachable from the start symbol must be expandable.
  {
    std::vector<bool> reached(nn, false);
    std::vector<std::uint32_t> work{start_};
    reached[start_] = true;
    while (!work.empty()) {
      std::uint32_t a = work.back();
      work.pop_back();
      if (alternatives_[a].empty()) {
        throw GrammarError("nonterminal '" + nonterminals_[a] + "' is reachable but has no productions");
      }
      for (std::size_t p : alternatives_[a]) {
        for (const auto& s : productions_[p].rhs) {
          if (!s.is_terminal() && !reached[s.index]) {
            reached[s.index] = true;
            work.push_back(s.index);
          }
        }
      }
    }
  }

  // Nullable and FIRST sets by fixed-point iteration.
  std::vector<bool> nullable(nn, false);
  std::vector<std::vector<bool>> first(nn, std::vector<bool>(nt, false));
  auto first_of_seq = [&](std::span<const Symbol> seq, std::vector<bool>& out) {
    for (const auto& s : seq) {
      if (s.is_terminal()) {
        out[s.index] = true;
        return false;
      }
      for (std::size_t t = 0; t < nt; ++t) {
        if (first[s.index][t]) out[t] = true;
      }
      if (!nullable[s.index]) return false;
    }
    return true;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& prod : productions_) {
      std::vector<bool> f(nt, false);
      bool null = first_of_seq(prod.rhs, f);
      for (std::size_t t = 0; t < nt; ++t) {
        if (f[t] && !first[prod.lhs][t]) first[prod.lhs][t] = changed = true;
      }
      if (null && !nullable[prod.lhs]) nullable[prod.lhs] = changed = true;
    }
  }

  // FOLLOW sets; index `end` marks end of input.
  std::vector<std::vector<bool>> follow(nn, std::vector<bool>(nt + 1, false));
  follow[start_][end] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& prod : productions_) {
      for (std::size_t i = 0; i < prod.rhs.size(); ++i) {
        const auto& s = prod.rhs[i];
        if (s.is_terminal()) continue;
        std::vector<bool> f(nt, false);
        bool null = first_of_seq(std::span(prod.rhs).subspan(i + 1), f);
        for (std::size_t t = 0; t < nt; ++t) {
          if (f[t] && !follow[s.index][t]) follow[s.index][t] = changed = true;
        }
        if (null) {
          for (std::size_t t = 0; t <= nt; ++t) {
            if (follow[prod.lhs][t] && !follow[s.index][t]) follow[s.index][t] = changed = true;
          }
        }
      }
    }
  }

  predict_.assign(nn * (nt + 1), -1);
  auto claim = [&](std::size_t a, std::size_t t, std::size_t p) {
    std::int32_t& cell = predict_[a * (nt + 1) + t];
    if (cell >= 0 && static_cast<std::size_t>(cell) != p) {
      std::string look = t == end ? "end of input" : "'" + terminals_[t] + "'";
      throw GrammarError("ambiguous grammar (not LL(1)): nonterminal '" + nonterminals_[a] +
                         "' has alternatives " + std::to_string(cell) + " and " + std::to_string(p) +
                         " on lookahead " + look);
    }
    cell = static_cast<std::int32_t>(p);
  };
  for (std::size_t p = 0; p < productions_.size(); ++p) {
    const auto& prod = productions_[p];
    std::vector<bool> f(nt, false);
    bool null = first_of_seq(prod.rhs, f);
    for (std::size_t t = 0; t < nt; ++t) {
      if (f[t]) claim(prod.lhs, t, p);
    }
    if (null) {
      for (std::size_t t = 0; t <= nt; ++t) {
        if (follow[prod.lhs][t]) claim(prod.lhs, t, p);
      }
    }
  }

  terminals_by_length_.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) terminals_by_length_[t] = static_cast<std::uint32_t>(t);
  std::stable_sort(terminals_by_length_.begin(), terminals_by_length_.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return terminals_[a].size() > terminals_[b].size(); });
}

std::span<const std::size_t> Grammar::alternatives(std::uint32_t nonterminal) const {
  if (nonterminal >= alternatives_.size()) throw std::out_of_range("nonterminal index out of range");
  return alternatives_[nonterminal];
}

std::optional<std::uint32_t> Grammar::find_nonterminal(std::string_view name) const {
  auto it = std::find(nonterminals_.begin(), nonterminals_.end(), name);
  if (it == nonterminals_.end()) return std::nullopt;
  return static_cast<std::uint32_t>(it - nonterminals_.begin());
}

std::optional<std::uint32_t> Grammar::find_terminal(std::string_view literal) const {
  auto it = std::find(terminals_.begin(), terminals_.end(), literal);
  if (it == terminals_.end()) return std::nullopt;
  return static_cast<std::uint32_t>(it - terminals_.begin());
}

std::optional<std::size_t> Grammar::predict(std::uint32_t nonterminal,
                                            std::optional<std::uint32_t> lookahead) const {
  const std::size_t width = terminals_.size() + 1;
  std::size_t t = lookahead ? *lookahead : terminals_.size();
  std::int32_t p = predict_.at(nonterminal * width + t);
  if (p < 0) return std::nullopt;
  return static_cast<std::size_t>(p);
}

std::vector<Token> Grammar::tokenize(std::string_view text) const {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    bool matched = false;
    for (std::uint32_t t : terminals_by_length_) {
      const std::string& lit = terminals_[t];
      if (text.compare(pos, lit.size(), lit) == 0) {
        tokens.push_back({t, pos, lit.size()});
        pos += lit.size();
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw ParseError("unrecognized character '" + std::string(1, text[pos]) + "'", pos + 1);
    }
  }
  return tokens;
}

std::string Grammar::symbol_name(const Symbol& s) const {
  return s.is_terminal() ? "'" + terminals_.at(s.index) + "'" : nonterminals_.at(s.index);
}

std::string Grammar::describe(std::size_t production) const {
  if (production == pad_rule()) return "<pad>";
  const auto& prod = productions_.at(production);
  std::string out = nonterminals_[prod.lhs] + " ->";
  if (prod.is_epsilon()) return out + " EPS";
  for (const auto& s : prod.rhs) out += " " + symbol_name(s);
  return out;
}

Grammar load_grammar(std::string_view text) {
  std::vector<RawLine> lines;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    ++lineno;
    std::string_view line = text.substr(start, stop - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    RawLine raw;
    if (split_line(line, lineno, raw)) lines.push_back(std::move(raw));
    start = stop + 1;
  }
  if (lines.empty()) throw GrammarError("grammar has no productions");

  std::vector<std::string> nonterminals;
  std::map<std::string, std::uint32_t> nt_index;
  for (const auto& l : lines) {
    if (nt_index.emplace(l.lhs, static_cast<std::uint32_t>(nonterminals.size())).second) {
      nonterminals.push_back(l.lhs);
    }
  }

  std::vector<std::string> terminals;
  std::map<std::string, std::uint32_t> t_index;
  std::vector<Production> productions;
  for (const auto& l : lines) {
    Production prod;
    prod.lhs = nt_index.at(l.lhs);
    for (const auto& w : l.rhs) {
      if (w.quoted) {
        auto [it, inserted] = t_index.emplace(w.text, static_cast<std::uint32_t>(terminals.size()));
        if (inserted) terminals.push_back(w.text);
        prod.rhs.push_back(Symbol::terminal(it->second));
      } else if (w.text != "EPS") {
        auto it = nt_index.find(w.text);
        if (it == nt_index.end()) throw GrammarError("unknown symbol '" + w.text + "'", l.line);
        prod.rhs.push_back(Symbol::nonterminal(it->second));
      }
    }
    if (std::find(productions.begin(), productions.end(), prod) != productions.end()) {
      throw GrammarError("duplicate production", l.line);
    }
    productions.push_back(std::move(prod));
  }
  return Grammar::from_parts(std::move(nonterminals), std::move(terminals), std::move(productions), 0);
}

Grammar load_grammar_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open grammar file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_grammar(buf.str());
}

const Grammar& default_grammar() {
  static const Grammar g = load_grammar(default_grammar_text());
  return g;
}

}  // namespace mantra
