#include "picky/treebank.hpp"

#include <fstream>
#include <functional>
#include <sstream>

namespace picky {

namespace {

struct Reader {
  std::string_view text;
  size_t pos = 0;
  int line = 1, col = 1;

  void advance() {
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }
  void skip_ws() {
    while (pos < text.size() && isspace(static_cast<unsigned char>(text[pos]))) advance();
  }
  bool eof() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() const { return text[pos]; }

  std::string atom() {
    size_t start = pos;
    while (pos < text.size() && !isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '(' && text[pos] != ')')
      advance();
    if (start == pos) throw Error("expected atom", line, col);
    return std::string(text.substr(start, pos - start));
  }

  TreeNode node() {
    skip_ws();
    if (pos >= text.size() || peek() != '(') throw Error("expected '('", line, col);
    advance();
    skip_ws();
    TreeNode n;
    n.label = atom();
    skip_ws();
    if (pos >= text.size()) throw Error("unbalanced brackets", line, col);
    if (peek() == ')') {
      advance();
      throw Error("empty node (" + n.label + ")", line, col);
    }
    if (peek() == '(') {
      while (true) {
        skip_ws();
        if (pos >= text.size()) throw Error("unbalanced brackets", line, col);
        if (peek() == ')') {
          advance();
          break;
        }
        if (peek() != '(')
          throw Error("mixed leaf/constituent children under " + n.label, line, col);
        n.children.push_back(node());
      }
    } else {
      // leaf: (pos word)
      n.word = atom();
      TreeNode leaf;
      leaf.label = n.label;
      leaf.word = n.word;
      n = leaf;
      skip_ws();
      if (pos >= text.size() || peek() != ')')
        throw Error("leaf (" + n.label + " " + n.word + ") not closed", line, col);
      advance();
    }
    return n;
  }
};

void assign_indexes(TreeNode& n, int& next) {
  if (n.is_leaf()) {
    n.word_index = next++;
    return;
  }
  for (TreeNode& c : n.children) assign_indexes(c, next);
}

const TreeNode& left_corner(const TreeNode& n) {
  return n.is_leaf() ? n : left_corner(n.children.front());
}

}  // namespace

TreeNode parse_tree_text(std::string_view text) {
  Reader r{text};
  TreeNode t = r.node();
  if (!r.eof()) throw Error("trailing input after tree", r.line, r.col);
  int next = 0;
  assign_indexes(t, next);
  if (t.is_leaf()) throw Error("tree root must be an internal node");
  return t;
}

std::vector<TreeNode> read_treebank(std::string_view text) {
  std::vector<TreeNode> trees;
  Reader r{text};
  while (!r.eof()) {
    // strip comment lines between trees
    if (r.peek() == '#') {
      while (r.pos < r.text.size() && r.peek() != '\n') r.advance();
      continue;
    }
    TreeNode t = r.node();
    int next = 0;
    assign_indexes(t, next);
    if (t.is_leaf()) throw Error("tree root must be an internal node", r.line, r.col);
    trees.push_back(std::move(t));
  }
  return trees;
}

std::vector<TreeNode> read_treebank_path(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_treebank(ss.str());
}

std::string bracketed(const TreeNode& t) {
  if (t.is_leaf()) return "(" + t.label + " " + t.word + ")";
  std::string out = "(" + t.label;
  for (const TreeNode& c : t.children) out += " " + bracketed(c);
  return out + ")";
}

Sentence yield_sentence(const TreeNode& tree) {
  Sentence s;
  std::function<void(const TreeNode&)> walk = [&](const TreeNode& n) {
    if (n.is_leaf()) {
      s.words.push_back(n.word);
      s.tags.push_back(n.label);
      return;
    }
    for (const TreeNode& c : n.children) walk(c);
  };
  walk(tree);
  return s;
}

int internal_node_count(const TreeNode& tree) {
  if (tree.is_leaf()) return 0;
  int n = 1;
  for (const TreeNode& c : tree.children) n += internal_node_count(c);
  return n;
}

void validate_tree(const TreeNode& tree, const Grammar& g) {
  std::function<void(const TreeNode&)> walk = [&](const TreeNode& n) {
    if (n.is_leaf()) {
      int id = g.symbol_id(n.label);
      if (id < 0 || !g.is_preterminal(id))
        throw Error("leaf tag " + n.label + " is not a declared preterminal");
      return;
    }
    int lhs = g.symbol_id(n.label);
    if (lhs < 0) throw Error("undeclared symbol " + n.label);
    std::vector<int> rhs;
    for (const TreeNode& c : n.children) {
      int id = g.symbol_id(c.label);
      if (id < 0) throw Error("undeclared symbol " + c.label);
      rhs.push_back(id);
    }
    if (g.find_rule(lhs, rhs) < 0) {
      std::string msg = "no grammar rule for node " + n.label + " ->";
      for (const TreeNode& c : n.children) msg += " " + c.label;
      throw Error(msg);
    }
    for (const TreeNode& c : n.children) walk(c);
  };
  walk(tree);
}

std::vector<TrainingEvent> extract_events(const TreeNode& tree, const Grammar& g) {
  Sentence s = yield_sentence(tree);
  std::vector<int> tags;
  for (const std::string& t : s.tags) {
    int id = g.symbol_id(t);
    if (id < 0) throw Error("undeclared symbol " + t);
    tags.push_back(id);
  }
  int n = static_cast<int>(tags.size());
  auto tag_at = [&](int i) {
    if (i < 0) return g.bos();
    if (i >= n) return g.eos();
    return tags[i];
  };

  std::vector<TrainingEvent> events;
  std::function<void(const TreeNode&, ParentContext)> walk =
      [&](const TreeNode& node, ParentContext ctx) {
        if (node.is_leaf()) return;
        int lhs = g.symbol_id(node.label);
        std::vector<int> rhs;
        for (const TreeNode& c : node.children) rhs.push_back(g.symbol_id(c.label));
        int rule = g.find_rule(lhs, rhs);
        if (rule < 0) throw Error("no grammar rule for node " + node.label);
        for (int i = 0; i < static_cast<int>(node.children.size()); ++i) {
          int lc = left_corner(node.children[i]).word_index;
          events.push_back(TrainingEvent{
              rule, i + 1, Trigram{tag_at(lc - 1), tag_at(lc), tag_at(lc + 1)}, ctx});
        }
        for (int i = 0; i < static_cast<int>(node.children.size()); ++i)
          walk(node.children[i], ParentContext{rule, i + 1});
      };
  walk(tree, kRootContext);
  return events;
}

GrammarFile induce_grammar(const std::vector<TreeNode>& corpus) {
  if (corpus.empty()) throw Error("empty corpus");

  // Rules first (first-appearance order); symbol ids are then assigned by
  // scanning the rule list the same way the grammar-file loader would, so
  // that serialize -> load round-trips with identical ids.
  struct RawRule {
    std::string lhs;
    std::vector<std::string> rhs;
    bool operator==(const RawRule&) const = default;
  };
  std::vector<RawRule> raw;
  std::vector<std::pair<std::string, std::string>> raw_lex;  // word, tag

  std::function<void(const TreeNode&)> collect = [&](const TreeNode& n) {
    if (n.is_leaf()) {
      if (n.word.empty()) throw Error("leaf with missing word under " + n.label);
      raw_lex.emplace_back(n.word, n.label);
      return;
    }
    RawRule r{n.label, {}};
    for (const TreeNode& c : n.children) r.rhs.push_back(c.label);
    if (std::find(raw.begin(), raw.end(), r) == raw.end()) raw.push_back(r);
    for (const TreeNode& c : n.children) collect(c);
  };
  for (const TreeNode& t : corpus) {
    if (t.is_leaf()) throw Error("tree root must be an internal node");
    collect(t);
  }

  GrammarFile out;
  Grammar& g = out.grammar;
  for (const RawRule& r : raw) {
    int lhs = g.intern(r.lhs);
    std::vector<int> rhs;
    for (const std::string& s : r.rhs) rhs.push_back(g.intern(s));
    g.add_rule(lhs, std::move(rhs));
  }
  g.finalize();
  for (auto& [word, tag] : raw_lex) {
    int id = g.symbol_id(tag);
    if (!g.is_preterminal(id))
      throw Error("leaf tag " + tag + " also used as a nonterminal");
    out.lexicon.add(word, id);
  }
  for (const TreeNode& t : corpus) validate_tree(t, g);
  return out;
}

}  // namespace picky
