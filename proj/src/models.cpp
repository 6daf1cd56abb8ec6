#include "picky/models.hpp"

#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace picky {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Score combine_scores(std::span<const Score> parts) {
  Score out;
  for (const Score& p : parts) {
    if (std::isnan(p.log_sum) || (p.log_sum > 0.0 && std::isinf(p.log_sum)))
      throw Error("non-finite log probability in score");
    if (p.count < 0) throw Error("negative constituent count in score");
    out += p;
  }
  return out;
}

void PredictionModel::count(const TrainingEvent& e) {
  counts_[e.trigram][{e.rule, e.child_index}] += 1;
  totals_[e.trigram] += 1;
}

double PredictionModel::prob(int rule, int child_index, const Trigram& t) const {
  auto ti = totals_.find(t);
  if (ti == totals_.end() || ti->second == 0) return 0.0;
  auto ci = counts_.find(t);
  auto ei = ci->second.find({rule, child_index});
  if (ei == ci->second.end()) return 0.0;
  return static_cast<double>(ei->second) / static_cast<double>(ti->second);
}

double PredictionModel::predict_prob(const Grammar& g, int rule, int child_index,
                                     const Trigram& t) const {
  if (child_index < 1 || child_index > g.rule(rule).arity())
    throw Error("child index " + std::to_string(child_index) + " out of range for " +
                g.rule_text(rule));
  return prob(rule, child_index, t);
}

long PredictionModel::total(const Trigram& t) const {
  auto it = totals_.find(t);
  return it == totals_.end() ? 0 : it->second;
}

double PredictionModel::min_positive(const Trigram& t) const {
  auto ci = counts_.find(t);
  if (ci == counts_.end()) return 0.0;
  long tot = totals_.at(t);
  long best = 0;
  for (auto& [key, c] : ci->second)
    if (c > 0 && (best == 0 || c < best)) best = c;
  return best == 0 ? 0.0 : static_cast<double>(best) / static_cast<double>(tot);
}

const std::map<std::pair<int, int>, long>* PredictionModel::entries(const Trigram& t) const {
  auto it = counts_.find(t);
  return it == counts_.end() ? nullptr : &it->second;
}

void CspModel::count(const Grammar& g, const TrainingEvent& e) {
  int plabel = e.parent.is_root() ? kRootLabel : g.rule(e.parent.rule).lhs;
  const Trigram& t = e.trigram;
  auto bump = [&](Dist& d) {
    d.counts[e.rule] += 1;
    d.total += 1;
  };
  bump(level0_[{e.parent.rule, e.parent.child_pos, t[0], t[1], t[2]}]);
  bump(level1_[{plabel, t[0], t[1], t[2]}]);
  bump(level2_[t]);
  bump(level3_[g.rule(e.rule).lhs]);
}

namespace {
// Probability of `rule` under dist when the level answers, -1 when it is
// silent (zero total) and the chain must back off further.
double level_prob(const Dist* d, int rule) {
  if (!d || d->total == 0) return -1.0;
  auto it = d->counts.find(rule);
  long c = it == d->counts.end() ? 0 : it->second;
  return static_cast<double>(c) / static_cast<double>(d->total);
}

template <class Map, class Key>
const Dist* find_dist(const Map& m, const Key& k) {
  auto it = m.find(k);
  return it == m.end() ? nullptr : &it->second;
}
}  // namespace

double CspModel::parent_free(const Grammar& g, int rule, const Trigram& t) const {
  if (double p = level_prob(find_dist(level2_, t), rule); p >= 0.0) return p;
  int lhs = g.rule(rule).lhs;
  if (double p = level_prob(find_dist(level3_, lhs), rule); p >= 0.0) return p;
  return 1.0 / static_cast<double>(g.rules_for_lhs(lhs).size());
}

double CspModel::rule_prob(const Grammar& g, int rule, ParentContext ctx,
                           const Trigram& t) const {
  int lhs = g.rule(rule).lhs;
  if (ctx.is_root()) {
    if (lhs != g.start())
      throw Error("root context requires a start-symbol rule, got " + g.rule_text(rule));
  } else {
    const Rule& parent = g.rule(ctx.rule);
    if (ctx.child_pos < 1 || ctx.child_pos > parent.arity())
      throw Error("parent child position out of range");
    if (parent.rhs[ctx.child_pos - 1] != lhs)
      throw Error("lhs mismatch: " + g.rule_text(rule) + " under " +
                  g.rule_text(ctx.rule) + " child " + std::to_string(ctx.child_pos));
  }

  Level0Key k0{ctx.rule, ctx.child_pos, t[0], t[1], t[2]};
  if (double p = level_prob(find_dist(level0_, k0), rule); p >= 0.0) return p;
  int plabel = ctx.is_root() ? kRootLabel : g.rule(ctx.rule).lhs;
  Level1Key k1{plabel, t[0], t[1], t[2]};
  if (double p = level_prob(find_dist(level1_, k1), rule); p >= 0.0) return p;
  return parent_free(g, rule, t);
}

double CspModel::unattached_prob(const Grammar& g, int rule, const Trigram& t) const {
  if (g.rule(rule).lhs == g.start()) return rule_prob(g, rule, kRootContext, t);
  return parent_free(g, rule, t);
}

Models train_events(std::span<const TrainingEvent> events, const Grammar& g) {
  if (events.empty()) throw Error("empty training event stream");
  Models m;
  for (const TrainingEvent& e : events) {
    m.prediction.count(e);
    // one rule emission per node: the child-1 event carries the node's own
    // left-corner trigram
    if (e.child_index == 1) m.csp.count(g, e);
  }
  return m;
}

Models train_corpus(const std::vector<TreeNode>& corpus, const Grammar& g) {
  std::vector<TrainingEvent> events;
  for (const TreeNode& t : corpus) {
    auto ev = extract_events(t, g);
    events.insert(events.end(), ev.begin(), ev.end());
  }
  return train_events(events, g);
}

double tree_log_prob(const CspModel& m, const TreeNode& tree, const Grammar& g) {
  Sentence s = yield_sentence(tree);
  std::vector<int> tags;
  for (const std::string& t : s.tags) tags.push_back(g.symbol_id(t));
  auto tag_at = [&](int i) {
    if (i < 0) return g.bos();
    if (i >= static_cast<int>(tags.size())) return g.eos();
    return tags[i];
  };

  double log_sum = 0.0;
  std::function<void(const TreeNode&, ParentContext)> walk =
      [&](const TreeNode& node, ParentContext ctx) {
        if (node.is_leaf()) return;
        std::vector<int> rhs;
        for (const TreeNode& c : node.children) rhs.push_back(g.symbol_id(c.label));
        int rule = g.find_rule(g.symbol_id(node.label), rhs);
        if (rule < 0) throw Error("no grammar rule for node " + node.label);
        const TreeNode* lc = &node;
        while (!lc->is_leaf()) lc = &lc->children.front();
        Trigram t{tag_at(lc->word_index - 1), tag_at(lc->word_index),
                  tag_at(lc->word_index + 1)};
        double p = m.rule_prob(g, rule, ctx, t);
        log_sum += p > 0.0 ? std::log(p) : kNegInf;
        for (int i = 0; i < static_cast<int>(node.children.size()); ++i)
          walk(node.children[i], ParentContext{rule, i + 1});
      };
  walk(tree, kRootContext);
  return log_sum;
}

double tree_prob(const CspModel& m, const TreeNode& tree, const Grammar& g) {
  return std::exp(tree_log_prob(m, tree, g));
}

// ---------------------------------------------------------------------------
// serialization

void save_models(std::ostream& out, const Grammar& g, const Lexicon& lex,
                 const Models& m) {
  out << "picky-model v1\n";
  out << "start " << g.name(g.start()) << "\n";
  out << "symbols " << g.num_symbols() << "\n";
  for (int i = 0; i < g.num_symbols(); ++i) out << g.symbol(i).name << "\n";
  out << "rules " << g.rules().size() << "\n";
  for (const Rule& r : g.rules()) out << g.rule_text(r.id) << "\n";
  out << "lexicon " << lex.words().size() << "\n";
  for (const std::string& w : lex.words()) {
    out << w << " :";
    for (int t : lex.tags(w)) out << " " << g.name(t);
    out << "\n";
  }
  for (auto& [t, entries] : m.prediction.counts())
    for (auto& [key, c] : entries)
      out << "P " << g.name(t[0]) << " " << g.name(t[1]) << " " << g.name(t[2]) << " "
          << key.first << " " << key.second << " " << c << "\n";
  for (auto& [k, dist] : m.csp.level0()) {
    auto [prule, ppos, t0, t1, t2] = k;
    for (auto& [rule, c] : dist.counts)
      out << "C 0 " << prule << " " << ppos << " " << g.name(t0) << " " << g.name(t1)
          << " " << g.name(t2) << " " << rule << " " << c << "\n";
  }
  out << "end\n";
}

void save_models_path(const std::string& path, const Grammar& g, const Lexicon& lex,
                      const Models& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  save_models(out, g, lex, m);
}

namespace {

struct RecordReader {
  std::istream& in;
  int record = 0;
  std::string line{};

  bool next() {
    while (std::getline(in, line)) {
      ++record;
      if (!line.empty()) return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("model file: " + msg + " at record " + std::to_string(record));
  }
};

}  // namespace

ModelFile load_models(std::istream& in) {
  RecordReader r{in};
  auto expect_line = [&](const char* what) {
    if (!r.next()) r.fail(std::string("truncated file, expected ") + what);
    return r.line;
  };

  if (expect_line("header") != "picky-model v1")
    r.fail("version mismatch, expected 'picky-model v1', got '" + r.line + "'");

  ModelFile mf;
  Grammar& g = mf.grammar;

  std::istringstream hs(expect_line("start"));
  std::string kw, start_name;
  if (!(hs >> kw >> start_name) || kw != "start") r.fail("expected start record");

  long nsym = 0;
  {
    std::istringstream s(expect_line("symbols"));
    if (!(s >> kw >> nsym) || kw != "symbols" || nsym < 0) r.fail("expected symbol count");
  }
  for (long i = 0; i < nsym; ++i) {
    std::string name = expect_line("symbol name");
    if (g.intern(name) != i) r.fail("duplicate symbol " + name);
  }

  long nrules = 0;
  {
    std::istringstream s(expect_line("rules"));
    if (!(s >> kw >> nrules) || kw != "rules" || nrules < 0) r.fail("expected rule count");
  }
  auto sym = [&](const std::string& name) {
    int id = g.symbol_id(name);
    if (id < 0) r.fail("undeclared symbol " + name);
    return id;
  };
  for (long i = 0; i < nrules; ++i) {
    std::istringstream s(expect_line("rule"));
    std::string lhs, arrow, tok;
    if (!(s >> lhs >> arrow) || arrow != "->") r.fail("malformed rule record");
    std::vector<int> rhs;
    while (s >> tok) rhs.push_back(sym(tok));
    if (rhs.empty()) r.fail("epsilon rule in model file");
    g.add_rule(sym(lhs), std::move(rhs));
  }
  g.set_start(sym(start_name));
  g.finalize();

  long nlex = 0;
  {
    std::istringstream s(expect_line("lexicon"));
    if (!(s >> kw >> nlex) || kw != "lexicon" || nlex < 0) r.fail("expected lexicon count");
  }
  for (long i = 0; i < nlex; ++i) {
    std::istringstream s(expect_line("lexicon entry"));
    std::string word, colon, tok;
    if (!(s >> word >> colon) || colon != ":") r.fail("malformed lexicon record");
    int seen = 0;
    while (s >> tok) {
      mf.lexicon.add(word, sym(tok));
      ++seen;
    }
    if (seen == 0) r.fail("lexicon entry without tags");
  }

  auto check_rule = [&](long id) {
    if (id < 0 || id >= nrules) r.fail("rule id out of range");
    return static_cast<int>(id);
  };
  std::vector<TrainingEvent> csp_events;
  while (true) {
    if (!r.next()) r.fail("truncated file, expected end record");
    if (r.line == "end") break;
    std::istringstream s(r.line);
    std::string tag;
    s >> tag;
    if (tag == "P") {
      std::string t0, t1, t2;
      long rule, idx, c;
      if (!(s >> t0 >> t1 >> t2 >> rule >> idx >> c) || c <= 0 || idx < 1)
        r.fail("malformed P record");
      TrainingEvent e{check_rule(rule), static_cast<int>(idx),
                      Trigram{sym(t0), sym(t1), sym(t2)}, kRootContext};
      for (long k = 0; k < c; ++k) mf.models.prediction.count(e);
    } else if (tag == "C") {
      long level, prule, ppos, rule, c;
      std::string t0, t1, t2;
      if (!(s >> level) || level != 0) r.fail("unsupported C level");
      if (!(s >> prule >> ppos >> t0 >> t1 >> t2 >> rule >> c) || c <= 0)
        r.fail("malformed C record");
      ParentContext ctx = kRootContext;
      if (prule >= 0) {
        ctx = ParentContext{check_rule(prule), static_cast<int>(ppos)};
        if (ppos < 1 || ppos > g.rule(ctx.rule).arity()) r.fail("malformed C record");
      }
      TrainingEvent e{check_rule(rule), 1, Trigram{sym(t0), sym(t1), sym(t2)}, ctx};
      for (long k = 0; k < c; ++k) mf.models.csp.count(g, e);
    } else {
      r.fail("unknown record type '" + tag + "'");
    }
  }
  return mf;
}

ModelFile load_models_path(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return load_models(in);
}

}  // namespace picky
