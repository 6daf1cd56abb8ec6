#include "picky/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "picky/agenda.hpp"

namespace picky {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Priority floor for predictions the model assigns no mass to; ranks below
// any covered prediction.
constexpr double kFloorProb = 1e-9;
}  // namespace

std::string PhaseSet::str() const {
  std::string out;
  auto add = [&](const char* s) {
    if (!out.empty()) out += ",";
    out += s;
  };
  if (i) add("I");
  if (ii) add("II");
  if (iii) add("III");
  return out;
}

PhaseSet PhaseSet::parse(std::string_view text) {
  PhaseSet p{false, false, false};
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t comma = text.find(',', pos);
    std::string_view tok = text.substr(
        pos, comma == std::string_view::npos ? text.size() - pos : comma - pos);
    if (tok == "I")
      p.i = true;
    else if (tok == "II")
      p.ii = true;
    else if (tok == "III")
      p.iii = true;
    else if (!tok.empty())
      throw Error("unknown phase name '" + std::string(tok) + "'");
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (!p.any()) throw Error("empty phase set");
  return p;
}

const char* status_name(ParseStatus s) {
  switch (s) {
    case ParseStatus::Parsed: return "parsed";
    case ParseStatus::Partial: return "partial";
    case ParseStatus::NoParse: return "no_parse";
    default: return "lexical_gap";
  }
}

TaggedSentence tag_gold(const Sentence& s, const Grammar& g) {
  TaggedSentence out;
  out.words = s.words;
  for (const std::string& t : s.tags) {
    int id = g.symbol_id(t);
    if (id < 0 || !g.is_preterminal(id))
      throw Error("tag " + t + " is not a declared preterminal");
    out.tags.push_back({id});
  }
  return out;
}

TaggedSentence tag_with_lexicon(const std::vector<std::string>& words,
                                const Lexicon& lex, int* gap_index) {
  TaggedSentence out;
  out.words = words;
  *gap_index = -1;
  for (size_t i = 0; i < words.size(); ++i) {
    std::vector<int> tags = lex.tags(words[i]);
    if (tags.empty() && *gap_index < 0) *gap_index = static_cast<int>(i);
    std::sort(tags.begin(), tags.end());
    out.tags.push_back(std::move(tags));
  }
  return out;
}

namespace {

struct Seek {
  int rule;
  double pred_log;
  int pred_span;
  Phase origin;
};

class ParseRun {
 public:
  ParseRun(const TaggedSentence& input, const Grammar& g, const Models& m,
           const ParserConfig& cfg)
      : in_(input),
        g_(g),
        m_(m),
        cfg_(cfg),
        n_(static_cast<int>(input.size())),
        chart_(g, std::max(n_, 1)),
        bos_flank_{g.bos()},
        eos_flank_{g.eos()},
        leftward_(cfg.phases.ii) {}

  ParseResult run();

 private:
  static int idx(Phase p) { return static_cast<int>(p) - 1; }

  const std::vector<int>& tags_at(int pos) const {
    if (pos < 0) return bos_flank_;
    if (pos >= n_) return eos_flank_;
    return in_.tags[pos];
  }

  // All POS trigrams centered at word position j.
  template <class F>
  void each_position_trigram(int j, F&& f) const {
    for (int l : tags_at(j - 1))
      for (int c : tags_at(j))
        for (int r : tags_at(j + 1)) f(Trigram{l, c, r});
  }

  int derived_tag_at(const Edge& e, int pos) const {
    if (e.is_leaf()) return e.leaf_tag;
    for (int cid : e.children) {
      const Edge& c = chart_.item(cid);
      if (pos >= c.start && pos < c.end) return derived_tag_at(c, pos);
    }
    return tags_at(pos).front();
  }

  // Trigrams of an item: the center is the tag of its left-corner leaf; the
  // right flank is derivation-determined when it falls inside the span.
  template <class F>
  void each_item_trigram(const Edge& e, F&& f) const {
    bool inside = e.start + 1 < e.end;
    int fixed = inside ? derived_tag_at(e, e.start + 1) : -1;
    for (int l : tags_at(e.start - 1)) {
      if (inside) {
        f(Trigram{l, e.lc_tag, fixed});
      } else {
        for (int r : tags_at(e.start + 1)) f(Trigram{l, e.lc_tag, r});
      }
    }
  }

  Trigram first_item_trigram(const Edge& e) const {
    int l = tags_at(e.start - 1).front();
    int r = e.start + 1 < e.end ? derived_tag_at(e, e.start + 1)
                                : tags_at(e.start + 1).front();
    return Trigram{l, e.lc_tag, r};
  }

  // Eq.-1 factor a child adds when consumed at child_index of rule.
  Score contribution(int cid, int rule, int child_index) const {
    const Edge& c = chart_.item(cid);
    if (c.is_leaf()) return Score{0.0, 0};
    double p = m_.csp.rule_prob(g_, c.rule, ParentContext{rule, child_index},
                                first_item_trigram(c));
    return Score{(p > 0.0 ? std::log(p) : kNegInf) + c.inner.log_sum,
                 c.inner.count + 1};
  }

  double heuristic_top(int rule, const Edge& e) const {
    double p = m_.csp.unattached_prob(g_, rule, first_item_trigram(e));
    return p > 0.0 ? std::log(p) : kNegInf;
  }

  void count_prediction() {
    chart_.count_prediction();
    ++preds_by_phase_[idx(current_)];
  }

  double priority_of(const Edge& e) const {
    double v = e.display_score().value();
    if (current_ != Phase::III) return v;
    // longest predictor first; geometric-mean score secondary
    int span = std::max(e.span_length(), e.pred_span);
    return 2.0 * span + std::clamp(v, 0.0, 1.0);
  }

  void after_add(AddResult res, int id) {
    if (res == AddResult::Duplicate) return;
    if (res == AddResult::Added) {
      ++edges_by_phase_[idx(current_)];
      if (cfg_.max_edges > 0 && chart_.edges_created() >= cfg_.max_edges) stop_ = true;
    }
    agenda_.push(id, priority_of(chart_.item(id)));
  }

  void finish_edge(Edge e) {
    if (stop_) return;
    if (e.lo == 1 && e.hi == g_.rule(e.rule).arity()) e.top_log = heuristic_top(e.rule, e);
    int id = -1;
    AddResult res = chart_.add_edge(std::move(e), &id);
    after_add(res, id);
  }

  void propose_over(int rule, int cid, int child_index, double pred_log, Phase origin,
                    int pred_span) {
    if (stop_) return;
    const Edge& c = chart_.item(cid);
    Edge e;
    e.rule = rule;
    e.lo = e.hi = child_index;
    e.start = c.start;
    e.end = c.end;
    e.lc_tag = c.lc_tag;
    e.children = {cid};
    e.origin = origin;
    e.pred_span = pred_span;
    e.inner = contribution(cid, rule, child_index);
    e.top_log = pred_log;
    finish_edge(std::move(e));
  }

  void extend(int eid, int cid, bool left) {
    if (stop_) return;
    Edge base = chart_.item(eid);
    const Edge& c = chart_.item(cid);
    Edge e;
    e.rule = base.rule;
    e.origin = base.origin;
    e.pred_span = base.pred_span;
    e.top_log = base.top_log;
    if (left) {
      e.lo = base.lo - 1;
      e.hi = base.hi;
      e.start = c.start;
      e.end = base.end;
      e.lc_tag = c.lc_tag;
      e.children.reserve(base.children.size() + 1);
      e.children.push_back(cid);
      e.children.insert(e.children.end(), base.children.begin(), base.children.end());
      e.inner = base.inner + contribution(cid, base.rule, e.lo);
    } else {
      e.lo = base.lo;
      e.hi = base.hi + 1;
      e.start = base.start;
      e.end = c.end;
      e.lc_tag = base.lc_tag;
      e.children = base.children;
      e.children.push_back(cid);
      e.inner = base.inner + contribution(cid, base.rule, e.hi);
    }
    finish_edge(std::move(e));
  }

  bool register_seek(int rule, int sym, int pos, double pred_log, Phase origin,
                     int pred_span) {
    if (!seek_registered_.insert({rule, pos}).second) return false;
    seeks_[key(sym, pos)].push_back(Seek{rule, pred_log, pred_span, origin});
    // catch up on constituents completed before the seek existed
    std::vector<int> existing = chart_.completes_starting(sym, pos);
    for (int cid : existing) {
      if (stop_) break;
      propose_over(rule, cid, 1, pred_log, origin, pred_span);
    }
    return true;
  }

  void instantiate_seeks_on(int cid) {
    const Edge& c = chart_.item(cid);
    auto it = seeks_.find(key(chart_.symbol_of(cid), c.start));
    if (it == seeks_.end()) return;
    std::vector<Seek> pending = it->second;
    for (const Seek& s : pending) {
      if (stop_) break;
      propose_over(s.rule, cid, 1, s.pred_log, s.origin, s.pred_span);
    }
  }

  void seed_leaves() {
    for (int j = 0; j < n_; ++j)
      for (int t : in_.tags[j]) chart_.add_leaf(j, t);
  }

  // Covered left-corner predictions from the word trigrams, plus the
  // exhaustive exception for rules that immediately dominate a preterminal.
  void phase1_entry() {
    for (int j = 0; j < n_ && !stop_; ++j) {
      std::map<int, double> covered;  // rule -> best prediction prob
      double floor = 0.0;
      each_position_trigram(j, [&](const Trigram& t) {
        double mp = m_.prediction.min_positive(t);
        if (mp > 0.0 && (floor == 0.0 || mp < floor)) floor = mp;
        const auto* entries = m_.prediction.entries(t);
        if (!entries) return;
        long total = m_.prediction.total(t);
        for (const auto& [key, cnt] : *entries) {
          if (key.second != 1) continue;
          double p = static_cast<double>(cnt) / static_cast<double>(total);
          auto [it, inserted] = covered.emplace(key.first, p);
          if (!inserted) it->second = std::max(it->second, p);
        }
      });
      if (floor == 0.0) floor = kFloorProb;

      for (const auto& [rule, p] : covered) {
        if (stop_) return;
        int first = g_.rule(rule).rhs.front();
        if (g_.is_preterminal(first)) {
          int leaf = chart_.leaf_id(j, first);
          if (leaf < 0) continue;  // trained tag not available at this position
          count_prediction();
          propose_over(rule, leaf, 1, std::log(p), Phase::I, 0);
        } else {
          if (register_seek(rule, first, j, std::log(p), Phase::I, 0))
            count_prediction();
        }
      }
      for (int c : tags_at(j)) {
        for (int rule : g_.rules_with_left_corner(c)) {
          if (stop_) return;
          if (covered.count(rule)) continue;
          count_prediction();
          propose_over(rule, chart_.leaf_id(j, c), 1, std::log(floor), Phase::I, 0);
        }
      }
    }
  }

  // Bidirectional covered prediction off a complete constituent: any child
  // whose left-corner trigram carries training mass.
  void phase2_predict_from(int cid) {
    const Edge c = chart_.item(cid);
    int csym = chart_.symbol_of(cid);
    std::map<std::pair<int, int>, double> proposals;
    each_item_trigram(c, [&](const Trigram& t) {
      const auto* entries = m_.prediction.entries(t);
      if (!entries) return;
      long total = m_.prediction.total(t);
      for (const auto& [key, cnt] : *entries) {
        if (g_.rule(key.first).rhs[key.second - 1] != csym) continue;
        double p = static_cast<double>(cnt) / static_cast<double>(total);
        auto [it, inserted] = proposals.emplace(key, p);
        if (!inserted) it->second = std::max(it->second, p);
      }
    });
    for (const auto& [key, p] : proposals) {
      if (stop_) return;
      count_prediction();
      propose_over(key.first, cid, key.second, std::log(p), Phase::II, 0);
    }
  }

  // Phase-III over-the-top prediction, restricted to parent rules whose first
  // child is the constituent. Rules the prediction
  // model assigns positive mass are skipped only when phase I ran: its seeks
  // are position-based and fire on any later completion, so those rules are
  // already in the chart. Leaf constituents are skipped on the same grounds
  // (the phase-I exception predicted every preterminal-first rule).
  void over_the_top(int cid) {
    const Edge c = chart_.item(cid);
    if (c.is_leaf() && cfg_.phases.i) return;
    int csym = chart_.symbol_of(cid);
    for (int rule : g_.rules_with_left_corner(csym)) {
      if (stop_) return;
      if (cfg_.phases.i) {
        bool covered = false;
        each_item_trigram(c, [&](const Trigram& t) {
          if (m_.prediction.prob(rule, 1, t) > 0.0) covered = true;
        });
        if (covered) continue;
      }
      count_prediction();
      propose_over(rule, cid, 1, std::log(kFloorProb), Phase::III, c.span_length());
    }
  }

  // Phase-III top-down filtering: predict expansions of the symbols needed
  // immediately left/right of an incomplete edge's recognized range. Covered
  // expansions and preterminal-first rules are skipped -- the model already
  // predicted the former and the phase-I exception the latter.
  void top_down_filter(int eid) {
    const Edge e = chart_.item(eid);
    const Rule& r = g_.rule(e.rule);
    if (e.hi < r.arity() && e.end < n_) {
      int needed = r.rhs[e.hi];
      if (g_.is_nonterminal(needed)) {
        for (int rule : g_.rules_for_lhs(needed)) {
          if (stop_) return;
          int first = g_.rule(rule).rhs.front();
          if (cfg_.phases.i) {
            // phase I already predicted preterminal-first rules everywhere
            // (the exhaustive exception) and covered rules as seeks
            if (g_.is_preterminal(first)) continue;
            bool covered = false;
            each_position_trigram(e.end, [&](const Trigram& t) {
              if (m_.prediction.prob(rule, 1, t) > 0.0) covered = true;
            });
            if (covered) continue;
          }
          if (g_.is_preterminal(first)) {
            int leaf = chart_.leaf_id(e.end, first);
            if (leaf < 0) continue;
            count_prediction();
            propose_over(rule, leaf, 1, std::log(kFloorProb), Phase::III,
                         e.span_length());
          } else if (register_seek(rule, first, e.end, std::log(kFloorProb),
                                   Phase::III, e.span_length())) {
            count_prediction();
          }
        }
      }
    }
    if (e.lo > 1 && e.start > 0) {
      int needed = r.rhs[e.lo - 2];
      if (g_.is_nonterminal(needed)) {
        for (int rule : g_.rules_for_lhs(needed)) {
          const Rule& rr = g_.rule(rule);
          int m = rr.arity();
          if (m > 1 && !leftward_) continue;  // could never extend leftward
          int last = rr.rhs.back();
          if (m == 1 && g_.is_preterminal(last) && cfg_.phases.i) continue;
          bool gate = m == 1 ? (cfg_.phases.i || cfg_.phases.ii) : cfg_.phases.ii;
          std::vector<int> anchors = chart_.completes_ending(last, e.start);
          for (int cid : anchors) {
            if (stop_) return;
            if (gate) {
              bool covered = false;
              each_item_trigram(chart_.item(cid), [&](const Trigram& t) {
                if (m_.prediction.prob(rule, m, t) > 0.0) covered = true;
              });
              if (covered) continue;
            }
            count_prediction();
            propose_over(rule, cid, m, std::log(kFloorProb), Phase::III,
                         e.span_length());
          }
        }
      }
    }
  }

  void process_complete(int id) {
    const Edge c = chart_.item(id);
    int sym = chart_.symbol_of(id);
    std::vector<int> waiting = chart_.needing_right(sym, c.start);
    for (int eid : waiting) {
      if (stop_) return;
      if (chart_.is_live(eid)) extend(eid, id, /*left=*/false);
    }
    if (leftward_) {
      waiting = chart_.needing_left(sym, c.end);
      for (int eid : waiting) {
        if (stop_) return;
        if (chart_.is_live(eid)) extend(eid, id, /*left=*/true);
      }
    }
    instantiate_seeks_on(id);
    if (stop_) return;
    if (current_ == Phase::II) phase2_predict_from(id);
    if (current_ == Phase::III) over_the_top(id);
  }

  void process_incomplete(int id) {
    const Edge e = chart_.item(id);
    const Rule& r = g_.rule(e.rule);
    if (e.hi < r.arity()) {
      std::vector<int> found = chart_.completes_starting(r.rhs[e.hi], e.end);
      for (int cid : found) {
        if (stop_) return;
        extend(id, cid, /*left=*/false);
      }
    }
    if (leftward_ && e.lo > 1) {
      std::vector<int> found = chart_.completes_ending(r.rhs[e.lo - 2], e.start);
      for (int cid : found) {
        if (stop_) return;
        extend(id, cid, /*left=*/true);
      }
    }
    if (current_ == Phase::III) top_down_filter(id);
  }

  void sweep(Phase p) {
    int size_now = chart_.size();
    for (int id = 0; id < size_now && !stop_; ++id) {
      if (!chart_.is_live(id)) continue;
      if (chart_.is_complete(id)) {
        if (p == Phase::II) phase2_predict_from(id);
        if (p == Phase::III) over_the_top(id);
      } else if (p == Phase::III) {
        top_down_filter(id);
      }
    }
  }

  void run_loop() {
    auto stale = [this](int eid) { return !chart_.is_live(eid); };
    while (!stop_) {
      if (cfg_.stop_on_first_span && chart_.saw_full_span()) {
        stop_ = true;
        return;
      }
      if (cfg_.min_score) {
        auto top = agenda_.peek_max_priority(stale);
        if (!top) return;
        if (*top < *cfg_.min_score) {
          stop_ = true;
          return;
        }
      }
      auto item = agenda_.pop_best(stale);
      if (!item) return;  // phase quiesced
      if (chart_.is_complete(item->edge_id))
        process_complete(item->edge_id);
      else
        process_incomplete(item->edge_id);
    }
  }

  static long key(int sym, int pos) { return static_cast<long>(sym) * 1000003 + pos; }

  const TaggedSentence& in_;
  const Grammar& g_;
  const Models& m_;
  const ParserConfig& cfg_;
  int n_;
  Chart chart_;
  Agenda agenda_;
  std::vector<int> bos_flank_, eos_flank_;
  bool leftward_;
  Phase current_ = Phase::I;
  Phase reached_ = Phase::I;
  bool stop_ = false;
  std::map<long, std::vector<Seek>> seeks_;
  std::set<std::pair<int, int>> seek_registered_;  // (rule, position)
  std::array<long, 3> preds_by_phase_{0, 0, 0};
  std::array<long, 3> edges_by_phase_{0, 0, 0};
};

void fill_words(TreeNode& t, const std::vector<std::string>& words) {
  if (t.is_leaf()) {
    t.word = words[t.word_index];
    return;
  }
  for (TreeNode& c : t.children) fill_words(c, words);
}

ParseResult ParseRun::run() {
  seed_leaves();
  for (Phase p : {Phase::I, Phase::II, Phase::III}) {
    if (!cfg_.phases.has(p)) continue;
    if (stop_) break;
    current_ = p;
    reached_ = p;
    switch (p) {
      case Phase::I: phase1_entry(); break;
      case Phase::II: sweep(Phase::II); break;
      case Phase::III: sweep(Phase::III); break;
    }
    run_loop();
  }

  ParseResult res;
  res.phase_reached = reached_;
  res.stats.predictions = chart_.predictions();
  res.stats.completions = chart_.completions();
  res.stats.edges_created = chart_.edges_created();
  res.stats.improvements = chart_.improvements();
  res.stats.predictions_by_phase = preds_by_phase_;
  res.stats.edges_by_phase = edges_by_phase_;

  int full = chart_.best_full_span(g_.start());
  if (full >= 0) {
    res.status = ParseStatus::Parsed;
    res.tree = chart_.extract_tree(full);
    res.tree_log_prob = chart_.item(full).total_log();
  } else if (int any = chart_.best_complete(g_.start()); any >= 0) {
    res.status = ParseStatus::Partial;
    res.tree = chart_.extract_tree(any);
    res.tree_log_prob = chart_.item(any).total_log();
  } else {
    res.status = ParseStatus::NoParse;
    res.tree_log_prob = kNegInf;
  }
  if (res.tree) fill_words(*res.tree, in_.words);
  if (cfg_.capture_chart_dump) res.chart_dump = chart_.dump();
  if (cfg_.validate_chart) chart_.validate();
  return res;
}

}  // namespace

ParseResult parse(const TaggedSentence& input, const Grammar& g, const Models& m,
                  const ParserConfig& cfg) {
  if (!cfg.phases.any()) throw Error("parser config has no phases");
  if (cfg.min_score && (*cfg.min_score <= 0.0 || *cfg.min_score > 1.0))
    throw Error("min_score must lie in (0,1]");
  if (input.size() == 0) throw Error("empty sentence");
  if (input.words.size() != input.tags.size())
    throw Error("words/tags length mismatch");
  for (const auto& tags : input.tags)
    if (tags.empty()) throw Error("position without candidate tags");
  ParseRun run(input, g, m, cfg);
  return run.run();
}

ParseResult parse_words(const std::vector<std::string>& words, const Grammar& g,
                        const Lexicon& lex, const Models& m, const ParserConfig& cfg) {
  int gap = -1;
  TaggedSentence input = tag_with_lexicon(words, lex, &gap);
  if (gap >= 0) {
    ParseResult res;
    res.status = ParseStatus::LexicalGap;
    res.tree_log_prob = kNegInf;
    return res;
  }
  return parse(input, g, m, cfg);
}

}  // namespace picky
