#ifndef PICKY_GRAMMAR_HPP
#define PICKY_GRAMMAR_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace picky {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg, int line = 0, int column = 0)
      : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) +
                                          ", column " + std::to_string(column) + ")"
                                    : msg),
        line(line),
        column(column) {}
  int line;
  int column;
};

enum class SymbolKind { Nonterminal, Preterminal, Boundary };

struct Symbol {
  int id = -1;
  std::string name;
  SymbolKind kind = SymbolKind::Nonterminal;
};

struct Rule {
  int id = -1;
  int lhs = -1;
  std::vector<int> rhs;  // symbol ids, never empty
  int arity() const { return static_cast<int>(rhs.size()); }
};

/// A rule together with a 1-based child position of some member symbol.
struct RuleSlot {
  int rule;
  int child_index;
  bool operator==(const RuleSlot&) const = default;
};

class Lexicon {
 public:
  void add(const std::string& word, int pos);
  /// Tags for a word; empty for unknown words (the caller decides fallback).
  const std::vector<int>& tags(const std::string& word) const;
  const std::vector<std::string>& words() const { return order_; }
  bool empty() const { return order_.empty(); }

 private:
  std::unordered_map<std::string, std::vector<int>> entries_;
  std::vector<std::string> order_;  // first-appearance order, for serialization
};

// Immutable after finalize(); safe to share across concurrent parses.
class Grammar {
 public:
  Grammar();

  // -- construction (used by the loader and by grammar induction) --
  int intern(const std::string& name);            // declare-on-first-use
  int add_rule(int lhs, std::vector<int> rhs);    // no duplicate check
  int find_rule(int lhs, const std::vector<int>& rhs) const;  // -1 if absent
  void set_start(int sym) { start_ = sym; }
  void mark_nonterminal(int sym) { symbols_[sym].kind = SymbolKind::Nonterminal; }
  /// Classifies symbols, validates (epsilon rules, unary cycles, boundaries)
  /// and builds the rule indexes. Must be called exactly once.
  void finalize();

  // -- symbols --
  int symbol_id(std::string_view name) const;  // -1 if absent
  const Symbol& symbol(int id) const;
  const std::string& name(int id) const { return symbol(id).name; }
  int num_symbols() const { return static_cast<int>(symbols_.size()); }
  bool is_preterminal(int id) const { return symbol(id).kind == SymbolKind::Preterminal; }
  bool is_nonterminal(int id) const { return symbol(id).kind == SymbolKind::Nonterminal; }
  int bos() const { return bos_; }
  int eos() const { return eos_; }
  int start() const { return start_; }

  // -- rules --
  const std::vector<Rule>& rules() const { return rules_; }
  const Rule& rule(int id) const;
  const std::vector<int>& rules_for_lhs(int sym) const;
  const std::vector<int>& rules_with_left_corner(int sym) const;
  const std::vector<RuleSlot>& rules_with_member(int sym) const;

  std::string rule_text(int id) const;  // "NP -> det n"

 private:
  void check_symbol(int id) const;

  std::vector<Symbol> symbols_;
  std::unordered_map<std::string, int> by_name_;
  std::vector<Rule> rules_;
  int start_ = -1;
  int bos_ = -1;
  int eos_ = -1;
  bool finalized_ = false;
  std::vector<std::vector<int>> rules_by_lhs_;
  std::vector<std::vector<int>> rules_by_left_corner_;
  std::vector<std::vector<RuleSlot>> rules_by_member_;
};

struct GrammarFile {
  Grammar grammar;
  Lexicon lexicon;
};

// Grammar file format: one rule per line "LHS -> RHS1 RHS2 ...", optional
// "%start SYM" directive, lexicon section after a "%lexicon" line with
// entries "word : pos1 pos2 ...". '#' starts a comment, blank lines ignored.
GrammarFile load_grammar(std::string_view text);
GrammarFile load_grammar_path(const std::string& path);
std::string serialize(const Grammar& g, const Lexicon& lex);

const std::vector<int>& pos_tags(const Lexicon& lex, const std::string& word);

}  // namespace picky

#endif
