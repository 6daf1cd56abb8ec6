#ifndef PICKY_TREEBANK_HPP
#define PICKY_TREEBANK_HPP

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "picky/grammar.hpp"

namespace picky {

// Bracketed parse tree. Labels and words are kept as strings so treebanks can
// be read before any grammar exists; grammar-dependent operations resolve
// them on demand.
struct TreeNode {
  std::string label;
  std::vector<TreeNode> children;  // empty for leaves
  std::string word;                // leaves only
  int word_index = -1;             // leaves only, 0-based

  bool is_leaf() const { return children.empty(); }
  bool operator==(const TreeNode&) const = default;
};

struct Sentence {
  std::vector<std::string> words;
  std::vector<std::string> tags;  // preterminal names, same length
  size_t size() const { return words.size(); }
};

/// POS triple (left neighbor, left-corner, right neighbor), as symbol ids
/// with BOS/EOS at the sentence boundaries.
using Trigram = std::array<int, 3>;

/// Parent conditioning of Eq.-style rule probabilities: the parent's rule and
/// this node's 1-based position in it. rule == kRootContext marks tree roots.
struct ParentContext {
  int rule = -1;
  int child_pos = 0;
  bool is_root() const { return rule < 0; }
  bool operator==(const ParentContext&) const = default;
  auto operator<=>(const ParentContext&) const = default;
};

inline constexpr ParentContext kRootContext{-1, 0};

struct TrainingEvent {
  int rule;           // grammar rule of the node
  int child_index;    // 1-based
  Trigram trigram;    // centered at the left-corner word of that child
  ParentContext parent;
};

TreeNode parse_tree_text(std::string_view text);
std::vector<TreeNode> read_treebank(std::string_view text);
std::vector<TreeNode> read_treebank_path(const std::string& path);
std::string bracketed(const TreeNode& t);

Sentence yield_sentence(const TreeNode& tree);
int internal_node_count(const TreeNode& tree);

/// Checks the tree against the grammar: every internal node matches a rule,
/// every leaf tag is a declared preterminal. Throws on violation.
void validate_tree(const TreeNode& tree, const Grammar& g);

std::vector<TrainingEvent> extract_events(const TreeNode& tree, const Grammar& g);

GrammarFile induce_grammar(const std::vector<TreeNode>& corpus);

}  // namespace picky

#endif
