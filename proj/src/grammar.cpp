#include "picky/grammar.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace picky {

namespace {
const char* kBosName = "<bos>";
const char* kEosName = "<eos>";
const std::vector<int> kNoTags;
}  // namespace

void Lexicon::add(const std::string& word, int pos) {
  auto it = entries_.find(word);
  if (it == entries_.end()) {
    order_.push_back(word);
    entries_[word].push_back(pos);
    return;
  }
  auto& v = it->second;
  if (std::find(v.begin(), v.end(), pos) == v.end()) v.push_back(pos);
}

const std::vector<int>& Lexicon::tags(const std::string& word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? kNoTags : it->second;
}

const std::vector<int>& pos_tags(const Lexicon& lex, const std::string& word) {
  return lex.tags(word);
}

Grammar::Grammar() = default;

int Grammar::intern(const std::string& name) {
  auto it = by_name_.find(name);
  if (it != by_name_.end()) return it->second;
  int id = static_cast<int>(symbols_.size());
  symbols_.push_back(Symbol{id, name, SymbolKind::Preterminal});
  by_name_.emplace(name, id);
  return id;
}

int Grammar::add_rule(int lhs, std::vector<int> rhs) {
  int id = static_cast<int>(rules_.size());
  rules_.push_back(Rule{id, lhs, std::move(rhs)});
  return id;
}

int Grammar::find_rule(int lhs, const std::vector<int>& rhs) const {
  for (const Rule& r : rules_)
    if (r.lhs == lhs && r.rhs == rhs) return r.id;
  return -1;
}

void Grammar::check_symbol(int id) const {
  if (id < 0 || id >= static_cast<int>(symbols_.size()))
    throw Error("undeclared symbol id " + std::to_string(id));
}

const Symbol& Grammar::symbol(int id) const {
  check_symbol(id);
  return symbols_[id];
}

int Grammar::symbol_id(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? -1 : it->second;
}

const Rule& Grammar::rule(int id) const {
  if (id < 0 || id >= static_cast<int>(rules_.size()))
    throw Error("unknown rule id " + std::to_string(id));
  return rules_[id];
}

const std::vector<int>& Grammar::rules_for_lhs(int sym) const {
  check_symbol(sym);
  return rules_by_lhs_[sym];
}

const std::vector<int>& Grammar::rules_with_left_corner(int sym) const {
  check_symbol(sym);
  return rules_by_left_corner_[sym];
}

const std::vector<RuleSlot>& Grammar::rules_with_member(int sym) const {
  check_symbol(sym);
  return rules_by_member_[sym];
}

std::string Grammar::rule_text(int id) const {
  const Rule& r = rule(id);
  std::string out = name(r.lhs) + " ->";
  for (int s : r.rhs) out += " " + name(s);
  return out;
}

void Grammar::finalize() {
  if (finalized_) throw Error("grammar already finalized");
  finalized_ = true;

  for (const Rule& r : rules_) {
    if (r.rhs.empty()) throw Error("epsilon rule rejected: " + name(r.lhs) + " ->");
    symbols_[r.lhs].kind = SymbolKind::Nonterminal;
  }
  if (rules_.empty()) throw Error("grammar has no rules");
  if (start_ < 0) start_ = rules_.front().lhs;
  if (symbols_[start_].kind != SymbolKind::Nonterminal)
    throw Error("start symbol " + name(start_) + " is not a nonterminal");

  bos_ = intern(kBosName);
  symbols_[bos_].kind = SymbolKind::Boundary;
  eos_ = intern(kEosName);
  symbols_[eos_].kind = SymbolKind::Boundary;

  // Unary cycle detection over nonterminal -> nonterminal arity-1 rules.
  int n = num_symbols();
  std::vector<std::vector<int>> unary(n);
  for (const Rule& r : rules_)
    if (r.arity() == 1 && symbols_[r.rhs[0]].kind == SymbolKind::Nonterminal)
      unary[r.lhs].push_back(r.rhs[0]);
  std::vector<int> color(n, 0);  // 0 white, 1 grey, 2 black
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (color[s]) continue;
    stack.assign(1, s);
    std::vector<int> iter(n, 0);
    while (!stack.empty()) {
      int u = stack.back();
      if (color[u] == 0) color[u] = 1;
      bool advanced = false;
      while (iter[u] < static_cast<int>(unary[u].size())) {
        int v = unary[u][iter[u]++];
        if (color[v] == 1) throw Error("cyclic unary chain through " + name(v));
        if (color[v] == 0) {
          stack.push_back(v);
          advanced = true;
          break;
        }
      }
      if (!advanced && stack.back() == u) {
        color[u] = 2;
        stack.pop_back();
      }
    }
  }

  rules_by_lhs_.assign(n, {});
  rules_by_left_corner_.assign(n, {});
  rules_by_member_.assign(n, {});
  for (const Rule& r : rules_) {
    rules_by_lhs_[r.lhs].push_back(r.id);
    rules_by_left_corner_[r.rhs.front()].push_back(r.id);
    for (int i = 0; i < r.arity(); ++i)
      rules_by_member_[r.rhs[i]].push_back(RuleSlot{r.id, i + 1});
  }
}

namespace {

struct Line {
  int number;
  std::string text;
};

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

int column_of(const std::string& line, const std::string& tok, int nth) {
  // column of the nth occurrence of tok as a whitespace-delimited token
  size_t pos = 0;
  int seen = 0;
  while (pos < line.size()) {
    while (pos < line.size() && isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    size_t end = pos;
    while (end < line.size() && !isspace(static_cast<unsigned char>(line[end]))) ++end;
    if (line.compare(pos, end - pos, tok) == 0 && ++seen > nth)
      return static_cast<int>(pos) + 1;
    pos = end;
  }
  return 1;
}

}  // namespace

GrammarFile load_grammar(std::string_view text) {
  struct RawRule {
    std::string lhs;
    std::vector<std::string> rhs;
    int line;
  };
  struct RawEntry {
    std::string word;
    std::vector<std::string> tags;
    int line;
  };
  std::vector<RawRule> raw_rules;
  std::vector<RawEntry> raw_entries;
  std::string start_name;
  int start_line = 0;

  bool in_lexicon = false;
  int lineno = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string line(text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                   : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::vector<std::string> toks = split_ws(line);
    if (toks.empty()) continue;

    if (toks[0] == "%lexicon") {
      if (toks.size() != 1) throw Error("unexpected tokens after %lexicon", lineno, 1);
      in_lexicon = true;
      continue;
    }
    if (toks[0] == "%start") {
      if (toks.size() != 2) throw Error("%start expects one symbol", lineno, 1);
      start_name = toks[1];
      start_line = lineno;
      continue;
    }
    if (toks[0].front() == '%')
      throw Error("unknown directive " + toks[0], lineno, 1);

    if (!in_lexicon) {
      if (toks.size() < 2 || toks[1] != "->")
        throw Error("expected 'LHS -> RHS...'", lineno,
                    column_of(line, toks.size() > 1 ? toks[1] : toks[0], 0));
      if (toks.size() == 2)
        throw Error("epsilon rule rejected: " + toks[0] + " ->", lineno, 1);
      raw_rules.push_back(
          {toks[0], std::vector<std::string>(toks.begin() + 2, toks.end()), lineno});
    } else {
      if (toks.size() < 3 || toks[1] != ":")
        throw Error("expected 'word : pos...'", lineno, 1);
      raw_entries.push_back(
          {toks[0], std::vector<std::string>(toks.begin() + 2, toks.end()), lineno});
    }
  }
  if (raw_rules.empty()) throw Error("grammar has no rules");

  GrammarFile out;
  Grammar& g = out.grammar;
  for (const RawRule& rr : raw_rules) {
    if (rr.lhs == kBosName || rr.lhs == kEosName)
      throw Error("reserved boundary symbol " + rr.lhs, rr.line, 1);
    int lhs = g.intern(rr.lhs);
    std::vector<int> rhs;
    rhs.reserve(rr.rhs.size());
    for (const std::string& t : rr.rhs) {
      if (t == kBosName || t == kEosName)
        throw Error("reserved boundary symbol " + t, rr.line, 1);
      rhs.push_back(g.intern(t));
    }
    if (g.find_rule(lhs, rhs) >= 0)
      throw Error("duplicate rule: " + rr.lhs, rr.line, 1);
    g.add_rule(lhs, std::move(rhs));
  }
  if (!start_name.empty()) {
    int s = g.symbol_id(start_name);
    if (s < 0) throw Error("undeclared symbol " + start_name, start_line, 1);
    g.set_start(s);
  }
  // Classify before reading the lexicon so POS entries can be checked.
  g.finalize();

  for (const RawEntry& re : raw_entries) {
    for (const std::string& t : re.tags) {
      int id = g.symbol_id(t);
      if (id < 0)
        throw Error("undeclared symbol " + t + " in lexicon entry for '" +
                        re.word + "'",
                    re.line, 1);
      if (!g.is_preterminal(id))
        throw Error(t + " is not a preterminal (lexicon entry for '" + re.word + "')",
                    re.line, 1);
      out.lexicon.add(re.word, id);
    }
  }
  return out;
}

GrammarFile load_grammar_path(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_grammar(ss.str());
}

std::string serialize(const Grammar& g, const Lexicon& lex) {
  std::ostringstream out;
  if (g.start() != g.rule(0).lhs) out << "%start " << g.name(g.start()) << "\n";
  for (const Rule& r : g.rules()) out << g.rule_text(r.id) << "\n";
  if (!lex.empty()) {
    out << "%lexicon\n";
    for (const std::string& w : lex.words()) {
      out << w << " :";
      for (int t : lex.tags(w)) out << " " << g.name(t);
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace picky
