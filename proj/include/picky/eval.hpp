#ifndef PICKY_EVAL_HPP
#define PICKY_EVAL_HPP

#include <set>

#include "picky/engine.hpp"

namespace picky {

struct SentenceOutcome {
  ParseResult result;
  bool correct = false;
  long needed = 0;  // internal nodes of the gold tree
};

struct EvalRow {
  std::string config;  // phase set or edge limit label
  double pred_ratio = 0.0;
  double comp_ratio = 0.0;
  double coverage = 0.0;     // % of all sentences parsed correctly
  double pct_error = 0.0;    // % parsed but wrong
  double pct_no_parse = 0.0; // remainder (includes partial)
  long n = 0;
};

struct PhaseAccuracyRow {
  std::string phase;  // "I + II", "III", "Overall"
  long n = 0;         // sentences that reached this phase group
  double accuracy = 0.0;  // correct / n
  double coverage = 0.0;  // correct / total
  double pct_error = 0.0; // parsed-but-wrong / n
};

struct EvalOptions {
  int jobs = 1;
  std::set<size_t> overrides;  // sentence indexes adjudicated correct
};

std::vector<SentenceOutcome> run_corpus(const std::vector<TreeNode>& gold,
                                        const Grammar& g, const Models& m,
                                        const ParserConfig& cfg,
                                        const EvalOptions& opt = {});

EvalRow aggregate(const std::vector<SentenceOutcome>& outcomes, std::string config,
                  long n_expected = -1);

EvalRow evaluate(const std::vector<TreeNode>& gold, const Grammar& g, const Models& m,
                 const ParserConfig& cfg, const EvalOptions& opt = {});

std::vector<EvalRow> sweep_phases(const std::vector<TreeNode>& gold, const Grammar& g,
                                  const Models& m, const ParserConfig& base,
                                  const std::vector<PhaseSet>& subsets,
                                  const EvalOptions& opt = {});

std::vector<EvalRow> sweep_edge_limit(const std::vector<TreeNode>& gold, const Grammar& g,
                                      const Models& m, const ParserConfig& base,
                                      const std::vector<long>& limits,
                                      const EvalOptions& opt = {});

std::vector<PhaseAccuracyRow> accuracy_by_phase(const std::vector<TreeNode>& gold,
                                                const Grammar& g, const Models& m,
                                                const ParserConfig& cfg,
                                                const EvalOptions& opt = {});

/// The standard phase-sweep grid: I / I,II / II / I,III / III / I,II,III / II,III.
std::vector<PhaseSet> default_phase_grid();

// Rendering. Percentages print with one decimal, trailing ".0" stripped
// ("89.3%", "97%"); ratios always with two decimals.
std::string format_pct(double v);
std::string format_ratio(double v);
/// One table row, cells joined by two spaces.
std::string format_row(const std::vector<std::string>& cells);
std::string render_eval_table(const std::vector<EvalRow>& rows, bool edge_sweep);
std::string render_phase_accuracy_table(const std::vector<PhaseAccuracyRow>& rows);
std::string render_csv(const std::vector<EvalRow>& rows);

}  // namespace picky

#endif
