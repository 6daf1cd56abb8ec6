#include "picky/chart.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace picky {

namespace {
const std::vector<int> kEmpty;
}

Chart::Chart(const Grammar& g, int num_words)
    : grammar_(g), num_words_(num_words), completes_by_symbol_(g.num_symbols()) {}

const std::vector<int>& Chart::find_or_empty(const PosIndex& idx, long key) {
  auto it = idx.find(key);
  return it == idx.end() ? kEmpty : it->second;
}

const std::vector<int>& Chart::completes_starting(int sym, int pos) const {
  return find_or_empty(complete_by_start_, pos_key(sym, pos));
}
const std::vector<int>& Chart::completes_ending(int sym, int pos) const {
  return find_or_empty(complete_by_end_, pos_key(sym, pos));
}
const std::vector<int>& Chart::needing_right(int sym, int pos) const {
  return find_or_empty(needing_right_, pos_key(sym, pos));
}
const std::vector<int>& Chart::needing_left(int sym, int pos) const {
  return find_or_empty(needing_left_, pos_key(sym, pos));
}
const std::vector<int>& Chart::completes_of(int sym) const {
  return completes_by_symbol_[sym];
}

bool Chart::is_complete(int id) const {
  const Edge& e = items_[id];
  return e.is_leaf() || (e.lo == 1 && e.hi == grammar_.rule(e.rule).arity());
}

int Chart::symbol_of(int id) const {
  const Edge& e = items_[id];
  return e.is_leaf() ? e.leaf_tag : grammar_.rule(e.rule).lhs;
}

EdgeKey Chart::key_of(const Edge& e) const {
  return EdgeKey{e.rule, e.lo, e.hi, e.start, e.end};
}

bool Chart::is_live(int id) const {
  const Edge& e = items_[id];
  if (e.is_leaf()) return true;
  auto it = live_.find(key_of(e));
  return it != live_.end() && it->second == id;
}

int Chart::live_id(const EdgeKey& k) const {
  auto it = live_.find(k);
  return it == live_.end() ? -1 : it->second;
}

int Chart::add_leaf(int word_index, int tag) {
  long key = pos_key(tag, word_index);
  auto it = leaf_ids_.find(key);
  if (it != leaf_ids_.end()) return it->second;
  Edge e;
  e.rule = -1;
  e.start = word_index;
  e.end = word_index + 1;
  e.lc_tag = tag;
  e.leaf_tag = tag;
  int id = static_cast<int>(items_.size());
  items_.push_back(std::move(e));
  leaf_ids_[key] = id;
  complete_by_start_[pos_key(tag, word_index)].push_back(id);
  complete_by_end_[pos_key(tag, word_index + 1)].push_back(id);
  completes_by_symbol_[tag].push_back(id);
  return id;
}

int Chart::leaf_id(int word_index, int tag) const {
  auto it = leaf_ids_.find(pos_key(tag, word_index));
  return it == leaf_ids_.end() ? -1 : it->second;
}

void Chart::check_invariants(const Edge& e) const {
  const Rule& r = grammar_.rule(e.rule);
  if (e.lo < 1 || e.lo > e.hi || e.hi > r.arity())
    throw Error("edge child range violates invariants: " + grammar_.rule_text(e.rule));
  if (e.start < 0 || e.start >= e.end || e.end > num_words_)
    throw Error("edge span violates invariants");
  if (static_cast<int>(e.children.size()) != e.hi - e.lo + 1)
    throw Error("edge children count mismatch");
#ifndef NDEBUG
  int pos = e.start;
  for (size_t i = 0; i < e.children.size(); ++i) {
    const Edge& c = items_[e.children[i]];
    if (c.start != pos) throw Error("edge children do not tile the span");
    pos = c.end;
  }
  if (pos != e.end) throw Error("edge children do not tile the span");
#endif
}

AddResult Chart::add_edge(Edge e, int* out_id) {
  check_invariants(e);
  EdgeKey key = key_of(e);
  auto it = live_.find(key);
  int replaced = -1;
  if (it != live_.end()) {
    const Edge& old = items_[it->second];
    if (e.inner.log_sum <= old.inner.log_sum) {
      if (out_id) *out_id = it->second;
      return AddResult::Duplicate;
    }
    replaced = it->second;
  }
  int id = static_cast<int>(items_.size());
  bool complete = e.lo == 1 && e.hi == grammar_.rule(e.rule).arity();
  if (complete && grammar_.rule(e.rule).lhs == grammar_.start() && e.start == 0 &&
      e.end == num_words_)
    saw_full_span_ = true;
  items_.push_back(std::move(e));
  live_[key] = id;
  index_edge(id, replaced);
  if (out_id) *out_id = id;
  if (replaced >= 0) {
    ++improvements_;
    return AddResult::Improved;
  }
  ++edges_created_;
  if (complete) ++completions_;
  return AddResult::Added;
}

void Chart::index_edge(int id, int replaced) {
  const Edge& e = items_[id];
  const Rule& r = grammar_.rule(e.rule);
  auto put = [&](PosIndex& idx, int sym, int pos) {
    auto& v = idx[pos_key(sym, pos)];
    if (replaced >= 0) {
      auto it = std::find(v.begin(), v.end(), replaced);
      if (it != v.end()) {
        *it = id;
        return;
      }
    }
    v.push_back(id);
  };
  if (e.lo == 1 && e.hi == r.arity()) {
    put(complete_by_start_, r.lhs, e.start);
    put(complete_by_end_, r.lhs, e.end);
    auto& v = completes_by_symbol_[r.lhs];
    if (replaced >= 0) {
      auto it = std::find(v.begin(), v.end(), replaced);
      if (it != v.end())
        *it = id;
      else
        v.push_back(id);
    } else {
      v.push_back(id);
    }
  } else {
    if (e.hi < r.arity()) put(needing_right_, r.rhs[e.hi], e.end);
    if (e.lo > 1) put(needing_left_, r.rhs[e.lo - 2], e.start);
  }
}

int Chart::best_complete(int sym) const {
  int best = -1;
  for (int id : completes_by_symbol_[sym]) {
    if (best < 0) {
      best = id;
      continue;
    }
    const Edge& a = items_[id];
    const Edge& b = items_[best];
    if (a.total_log() > b.total_log() ||
        (a.total_log() == b.total_log() &&
         (a.span_length() > b.span_length() ||
          (a.span_length() == b.span_length() && a.start < b.start))))
      best = id;
  }
  return best;
}

int Chart::best_full_span(int sym) const {
  int best = -1;
  for (int id : completes_by_symbol_[sym]) {
    const Edge& e = items_[id];
    if (e.start != 0 || e.end != num_words_) continue;
    if (best < 0 || e.total_log() > items_[best].total_log()) best = id;
  }
  return best;
}

TreeNode Chart::extract_tree(int id) const {
  if (id < 0 || id >= size()) throw Error("dangling constituent reference");
  const Edge& e = items_[id];
  TreeNode n;
  if (e.is_leaf()) {
    n.label = grammar_.name(e.leaf_tag);
    n.word_index = e.start;
    return n;  // word filled by the engine, which knows the sentence
  }
  const Rule& r = grammar_.rule(e.rule);
  if (e.lo != 1 || e.hi != r.arity()) throw Error("extract_tree on incomplete edge");
  n.label = grammar_.name(r.lhs);
  for (int c : e.children) n.children.push_back(extract_tree(c));
  return n;
}

std::string Chart::dump() const {
  std::map<EdgeKey, int> ordered;
  for (auto& [key, id] : live_) ordered.emplace(key, id);
  std::ostringstream out;
  for (auto& [key, id] : ordered) {
    const Edge& e = items_[id];
    out << "[" << e.start << "," << e.end << ") " << grammar_.rule_text(e.rule) << " "
        << e.lo << ".." << e.hi << " score=" << e.display_score().value()
        << " phase=" << phase_name(e.origin) << "\n";
  }
  return out.str();
}

void Chart::validate() const {
  std::unordered_map<EdgeKey, int, EdgeKeyHash> seen;
  PosIndex by_start, by_end, need_r, need_l;
  std::vector<std::vector<int>> by_sym(grammar_.num_symbols());
  for (int id = 0; id < size(); ++id) {
    if (!is_live(id)) continue;
    const Edge& e = items_[id];
    if (e.is_leaf()) {
      by_start[pos_key(e.leaf_tag, e.start)].push_back(id);
      by_end[pos_key(e.leaf_tag, e.end)].push_back(id);
      by_sym[e.leaf_tag].push_back(id);
      continue;
    }
    if (seen.count(key_of(e))) throw Error("duplicate live edge key in chart");
    seen[key_of(e)] = id;
    const Rule& r = grammar_.rule(e.rule);
    if (e.lo == 1 && e.hi == r.arity()) {
      by_start[pos_key(r.lhs, e.start)].push_back(id);
      by_end[pos_key(r.lhs, e.end)].push_back(id);
      by_sym[r.lhs].push_back(id);
    } else {
      if (e.hi < r.arity()) need_r[pos_key(r.rhs[e.hi], e.end)].push_back(id);
      if (e.lo > 1) need_l[pos_key(r.rhs[e.lo - 2], e.start)].push_back(id);
    }
  }
  auto same = [](const PosIndex& actual, PosIndex expected) {
    for (auto& [k, v] : actual) {
      std::vector<int> a = v;
      std::vector<int> b = expected[k];
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) return false;
      expected.erase(k);
    }
    for (auto& [k, v] : expected)
      if (!v.empty()) return false;
    return true;
  };
  if (!same(complete_by_start_, by_start) || !same(complete_by_end_, by_end) ||
      !same(needing_right_, need_r) || !same(needing_left_, need_l))
    throw Error("chart index inconsistency");
  for (int s = 0; s < grammar_.num_symbols(); ++s) {
    std::vector<int> a = completes_by_symbol_[s];
    std::sort(a.begin(), a.end());
    std::sort(by_sym[s].begin(), by_sym[s].end());
    if (a != by_sym[s]) throw Error("chart symbol index inconsistency");
  }
}

}  // namespace picky
