#include "picky/eval.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace picky {

std::vector<SentenceOutcome> run_corpus(const std::vector<TreeNode>& gold,
                                        const Grammar& g, const Models& m,
                                        const ParserConfig& cfg,
                                        const EvalOptions& opt) {
  if (gold.empty()) throw Error("empty evaluation corpus");
  std::vector<SentenceOutcome> out(gold.size());

  auto one = [&](size_t i) {
    const TreeNode& tree = gold[i];
    TaggedSentence input = tag_gold(yield_sentence(tree), g);
    SentenceOutcome o;
    o.result = parse(input, g, m, cfg);
    o.needed = internal_node_count(tree);
    o.result.stats.needed_constituents = o.needed;
    o.correct = (o.result.status == ParseStatus::Parsed && o.result.tree == tree) ||
                opt.overrides.count(i) > 0;
    out[i] = std::move(o);
  };

  int jobs = std::max(1, opt.jobs);
  if (jobs == 1 || gold.size() < 2) {
    for (size_t i = 0; i < gold.size(); ++i) one(i);
    return out;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  std::atomic<bool> failed{false};
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < gold.size(); i = next.fetch_add(1)) {
        try {
          one(i);
        } catch (...) {
          failed = true;
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failed) throw Error("evaluation worker failed");
  return out;
}

EvalRow aggregate(const std::vector<SentenceOutcome>& outcomes, std::string config,
                  long n_expected) {
  EvalRow row;
  row.config = std::move(config);
  row.n = n_expected >= 0 ? n_expected : static_cast<long>(outcomes.size());
  long predictions = 0, completions = 0, needed = 0;
  long correct = 0, wrong = 0, unparsed = 0;
  for (const SentenceOutcome& o : outcomes) {
    predictions += o.result.stats.predictions;
    completions += o.result.stats.completions;
    needed += o.needed;
    if (o.correct)
      ++correct;
    else if (o.result.status == ParseStatus::Parsed)
      ++wrong;
    else
      ++unparsed;
  }
  row.pred_ratio = needed > 0 ? static_cast<double>(predictions) / needed : 0.0;
  row.comp_ratio = predictions > 0 ? static_cast<double>(completions) / predictions : 0.0;
  double n = static_cast<double>(outcomes.size());
  row.coverage = 100.0 * correct / n;
  row.pct_error = 100.0 * wrong / n;
  row.pct_no_parse = 100.0 * unparsed / n;
  return row;
}

EvalRow evaluate(const std::vector<TreeNode>& gold, const Grammar& g, const Models& m,
                 const ParserConfig& cfg, const EvalOptions& opt) {
  return aggregate(run_corpus(gold, g, m, cfg, opt), cfg.phases.str());
}

std::vector<EvalRow> sweep_phases(const std::vector<TreeNode>& gold, const Grammar& g,
                                  const Models& m, const ParserConfig& base,
                                  const std::vector<PhaseSet>& subsets,
                                  const EvalOptions& opt) {
  std::vector<EvalRow> rows;
  for (const PhaseSet& ps : subsets) {
    ParserConfig cfg = base;
    cfg.phases = ps;
    rows.push_back(evaluate(gold, g, m, cfg, opt));
  }
  return rows;
}

std::vector<EvalRow> sweep_edge_limit(const std::vector<TreeNode>& gold, const Grammar& g,
                                      const Models& m, const ParserConfig& base,
                                      const std::vector<long>& limits,
                                      const EvalOptions& opt) {
  std::vector<EvalRow> rows;
  for (long limit : limits) {
    ParserConfig cfg = base;
    cfg.max_edges = limit;
    EvalRow row = aggregate(run_corpus(gold, g, m, cfg, opt),
                            limit > 0 ? std::to_string(limit) : "unlimited");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<PhaseAccuracyRow> accuracy_by_phase(const std::vector<TreeNode>& gold,
                                                const Grammar& g, const Models& m,
                                                const ParserConfig& cfg,
                                                const EvalOptions& opt) {
  std::vector<SentenceOutcome> outcomes = run_corpus(gold, g, m, cfg, opt);
  long total = static_cast<long>(outcomes.size());
  auto make = [&](const std::string& label, auto&& member) {
    PhaseAccuracyRow row;
    row.phase = label;
    long correct = 0, wrong = 0;
    for (const SentenceOutcome& o : outcomes) {
      if (!member(o)) continue;
      ++row.n;
      if (o.correct)
        ++correct;
      else if (o.result.status == ParseStatus::Parsed)
        ++wrong;
    }
    row.accuracy = row.n > 0 ? 100.0 * correct / row.n : 0.0;
    row.coverage = 100.0 * correct / total;
    row.pct_error = row.n > 0 ? 100.0 * wrong / row.n : 0.0;
    return row;
  };
  return {
      make("I + II", [](const SentenceOutcome& o) {
        return o.result.phase_reached != Phase::III;
      }),
      make("III", [](const SentenceOutcome& o) {
        return o.result.phase_reached == Phase::III;
      }),
      make("Overall", [](const SentenceOutcome&) { return true; }),
  };
}

std::vector<PhaseSet> default_phase_grid() {
  return {
      PhaseSet{true, false, false},  PhaseSet{true, true, false},
      PhaseSet{false, true, false},  PhaseSet{true, false, true},
      PhaseSet{false, false, true},  PhaseSet{true, true, true},
      PhaseSet{false, true, true},
  };
}

std::string format_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  std::string s(buf);
  if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.erase(s.size() - 2);
  return s + "%";
}

std::string format_ratio(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string format_row(const std::vector<std::string>& cells) {
  std::string out;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out += "  ";
    out += cells[i];
  }
  return out;
}

std::string render_eval_table(const std::vector<EvalRow>& rows, bool edge_sweep) {
  std::ostringstream out;
  out << format_row({edge_sweep ? "Maximum Edge Count" : "Phases", "Pred. Ratio",
                     "Comp. Ratio", "Coverage", "%Error"})
      << "\n";
  for (const EvalRow& r : rows)
    out << format_row({r.config, format_ratio(r.pred_ratio), format_ratio(r.comp_ratio),
                       format_pct(r.coverage), format_pct(r.pct_error)})
        << "\n";
  return out.str();
}

std::string render_phase_accuracy_table(const std::vector<PhaseAccuracyRow>& rows) {
  std::ostringstream out;
  out << format_row({"Phase", "No.", "Accuracy", "Coverage", "%Error"}) << "\n";
  for (const PhaseAccuracyRow& r : rows)
    out << format_row({r.phase, std::to_string(r.n), format_pct(r.accuracy),
                       format_pct(r.coverage), format_pct(r.pct_error)})
        << "\n";
  return out.str();
}

std::string render_csv(const std::vector<EvalRow>& rows) {
  std::ostringstream out;
  out << "config,pred_ratio,comp_ratio,coverage,pct_error,pct_no_parse,n\n";
  char buf[160];
  for (const EvalRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.6g,%.6g,%.6g,%.6g,%.6g,%ld\n", r.config.c_str(),
                  r.pred_ratio, r.comp_ratio, r.coverage, r.pct_error, r.pct_no_parse,
                  r.n);
    out << buf;
  }
  return out.str();
}

}  // namespace picky
