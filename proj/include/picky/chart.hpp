#ifndef PICKY_CHART_HPP
#define PICKY_CHART_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "picky/models.hpp"

namespace picky {

enum class Phase { I = 1, II = 2, III = 3 };

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::I: return "I";
    case Phase::II: return "II";
    default: return "III";
  }
}

// A bidirectional dotted-rule item: rule with a contiguous recognized child
// range [lo,hi] (1-based inclusive) over the word span [start,end). Complete
// when lo==1 and hi==arity. Preterminal leaf constituents are items with
// rule == -1.
struct Edge {
  int rule = -1;
  int lo = 1, hi = 1;
  int start = 0, end = 0;
  int lc_tag = -1;     // tag of the left-corner word of the first recognized child
  Score inner;         // sum of recognized child contributions (Viterbi-compared)
  double top_log = 0.0;  // complete: own-node factor; incomplete: log prediction prob
  std::vector<int> children;  // item ids, one per recognized child
  Phase origin = Phase::I;
  int pred_span = 0;   // words spanned by the phase-III predictor, 0 otherwise
  int leaf_tag = -1;   // leaves only

  bool is_leaf() const { return rule < 0; }
  int span_length() const { return end - start; }
  double total_log() const { return inner.log_sum + top_log; }
  /// Geometric-mean score over child contributions plus the top factor.
  Score display_score() const {
    if (is_leaf()) return Score{};
    return Score{inner.log_sum + top_log, inner.count + 1};
  }
};

struct EdgeKey {
  int rule, lo, hi, start, end;
  bool operator==(const EdgeKey&) const = default;
  auto operator<=>(const EdgeKey&) const = default;
};

struct EdgeKeyHash {
  size_t operator()(const EdgeKey& k) const {
    size_t h = static_cast<size_t>(k.rule);
    for (int v : {k.lo, k.hi, k.start, k.end}) h = h * 1000003u + static_cast<size_t>(v);
    return h;
  }
};

enum class AddResult { Added, Improved, Duplicate };

// The well-formed substring table. Holds one live edge per EdgeKey (the one
// with maximal raw log score; ties keep the first inserted), plus the
// adjacency indexes the engine needs. Single-writer: one chart per parse.
class Chart {
 public:
  Chart(const Grammar& g, int num_words);

  int add_leaf(int word_index, int tag);  // idempotent per (position, tag)
  int leaf_id(int word_index, int tag) const;  // -1 if not seeded

  AddResult add_edge(Edge e, int* out_id = nullptr);

  const Edge& item(int id) const { return items_[id]; }
  int size() const { return static_cast<int>(items_.size()); }
  bool is_live(int id) const;
  bool is_complete(int id) const;
  int symbol_of(int id) const;
  EdgeKey key_of(const Edge& e) const;
  int live_id(const EdgeKey& k) const;  // -1 if absent

  const std::vector<int>& completes_starting(int sym, int pos) const;
  const std::vector<int>& completes_ending(int sym, int pos) const;
  const std::vector<int>& needing_right(int sym, int pos) const;
  const std::vector<int>& needing_left(int sym, int pos) const;
  const std::vector<int>& completes_of(int sym) const;

  /// Best complete constituent labeled sym: max raw log score, ties broken by
  /// longer span, then leftmost start, then insertion order. -1 when none.
  int best_complete(int sym) const;
  int best_full_span(int sym) const;
  bool has_full_span(int sym) const { return best_full_span(sym) >= 0; }
  /// True once a full-span start-symbol constituent has completed.
  bool saw_full_span() const { return saw_full_span_; }

  TreeNode extract_tree(int id) const;

  long edges_created() const { return edges_created_; }
  long predictions() const { return predictions_; }
  long completions() const { return completions_; }
  long improvements() const { return improvements_; }
  void count_prediction() { ++predictions_; }

  /// One line per live rule edge, in key order.
  std::string dump() const;
  /// Index consistency: rescans the live set and checks it reproduces all
  /// four indexes exactly and that no key has two live edges. Throws on
  /// violation.
  void validate() const;

  const Grammar& grammar() const { return grammar_; }
  int num_words() const { return num_words_; }

 private:
  using PosIndex = std::unordered_map<long, std::vector<int>>;
  long pos_key(int sym, int pos) const { return static_cast<long>(sym) * (num_words_ + 2) + pos + 1; }
  static const std::vector<int>& find_or_empty(const PosIndex& idx, long key);
  void index_edge(int id, int replaced);
  void check_invariants(const Edge& e) const;

  const Grammar& grammar_;
  int num_words_;
  std::vector<Edge> items_;
  std::unordered_map<EdgeKey, int, EdgeKeyHash> live_;
  std::unordered_map<long, int> leaf_ids_;  // (pos, tag) -> item id
  PosIndex complete_by_start_, complete_by_end_;
  PosIndex needing_right_, needing_left_;
  std::vector<std::vector<int>> completes_by_symbol_;
  long edges_created_ = 0;
  long predictions_ = 0;
  long completions_ = 0;
  long improvements_ = 0;
  bool saw_full_span_ = false;
};

}  // namespace picky

#endif
