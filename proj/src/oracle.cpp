#include "picky/oracle.hpp"

#include <functional>

namespace picky {

namespace {

struct Enumerator {
  const Grammar& g;
  int n;
  std::vector<int> tags;
  const std::vector<std::string>& words;
  long cap;
  long trees = 0;

  // cell[sym][start][end]: all distinct subtrees of sym over [start,end)
  std::vector<std::vector<std::vector<std::vector<TreeNode>>>> cell;

  Enumerator(const Grammar& g_, const Sentence& s, long cap_)
      : g(g_), n(static_cast<int>(s.size())), words(s.words), cap(cap_) {
    for (const std::string& t : s.tags) {
      int id = g.symbol_id(t);
      if (id < 0 || !g.is_preterminal(id)) throw Error("lexical gap: tag " + t);
      tags.push_back(id);
    }
    cell.assign(g.num_symbols(),
                std::vector<std::vector<std::vector<TreeNode>>>(
                    n, std::vector<std::vector<TreeNode>>(n + 1)));
  }

  void bump() {
    if (++trees > cap) throw CapExceeded(cap);
  }

  // All ways to realize rhs[i..] over [pos,end); one leaf per preterminal,
  // cell lookups for nonterminals.
  void expand(const Rule& r, size_t i, int pos, int end, std::vector<TreeNode>& kids,
              std::vector<TreeNode>& out, const std::string& label) {
    if (i == r.rhs.size()) {
      if (pos != end) return;
      TreeNode node;
      node.label = label;
      node.children = kids;
      out.push_back(std::move(node));
      bump();
      return;
    }
    int sym = r.rhs[i];
    if (g.is_preterminal(sym)) {
      if (pos < end && tags[pos] == sym) {
        TreeNode leaf;
        leaf.label = g.name(sym);
        leaf.word = words[pos];
        leaf.word_index = pos;
        kids.push_back(std::move(leaf));
        expand(r, i + 1, pos + 1, end, kids, out, label);
        kids.pop_back();
      }
      return;
    }
    int remaining = static_cast<int>(r.rhs.size() - i - 1);
    for (int mid = pos + 1; mid <= end - remaining; ++mid) {
      for (const TreeNode& sub : cell[sym][pos][mid]) {
        kids.push_back(sub);
        expand(r, i + 1, mid, end, kids, out, label);
        kids.pop_back();
      }
    }
  }

  void fill() {
    for (int len = 1; len <= n; ++len) {
      for (int start = 0; start + len <= n; ++start) {
        int end = start + len;
        // non-unary rules first, then a unary closure to fixpoint; closure
        // terminates because the unary graph is acyclic
        std::vector<size_t> watermark(g.rules().size(), 0);
        for (const Rule& r : g.rules()) {
          if (r.arity() == 1 && g.is_nonterminal(r.rhs[0])) continue;
          std::vector<TreeNode> kids;
          std::vector<TreeNode> found;
          expand(r, 0, start, end, kids, found, g.name(r.lhs));
          auto& dst = cell[r.lhs][start][end];
          dst.insert(dst.end(), found.begin(), found.end());
        }
        bool changed = true;
        while (changed) {
          changed = false;
          for (const Rule& r : g.rules()) {
            if (r.arity() != 1 || !g.is_nonterminal(r.rhs[0])) continue;
            auto& src = cell[r.rhs[0]][start][end];
            size_t from = watermark[r.id];
            size_t until = src.size();
            if (from >= until) continue;
            watermark[r.id] = until;
            changed = true;
            for (size_t k = from; k < until; ++k) {
              TreeNode node;
              node.label = g.name(r.lhs);
              node.children = {src[k]};
              cell[r.lhs][start][end].push_back(std::move(node));
              bump();
            }
          }
        }
      }
    }
  }
};

}  // namespace

std::vector<TreeNode> all_parses(const Grammar& g, const Sentence& sentence, long cap) {
  if (sentence.size() == 0) throw Error("empty sentence");
  Enumerator e(g, sentence, cap);
  e.fill();
  return e.cell[g.start()][0][e.n];
}

std::optional<std::pair<TreeNode, double>> best_parse_bruteforce(const Grammar& g,
                                                                 const Sentence& sentence,
                                                                 const CspModel& csp,
                                                                 long cap) {
  std::vector<TreeNode> parses = all_parses(g, sentence, cap);
  if (parses.empty()) return std::nullopt;
  const TreeNode* best = nullptr;
  double best_p = -1.0;
  for (const TreeNode& t : parses) {
    double p = tree_prob(csp, t, g);
    if (p > best_p) {
      best_p = p;
      best = &t;
    }
  }
  return std::make_pair(*best, best_p);
}

}  // namespace picky
