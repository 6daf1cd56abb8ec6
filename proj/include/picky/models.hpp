#ifndef PICKY_MODELS_HPP
#define PICKY_MODELS_HPP

#include <cmath>
#include <iosfwd>
#include <map>
#include <span>
#include <tuple>

#include "picky/grammar.hpp"
#include "picky/treebank.hpp"

namespace picky {

// Geometric-mean score: exp of the mean log probability over the constituents
// of a (partial) structure. Probability 0 is the -inf sentinel.
struct Score {
  double log_sum = 0.0;
  int count = 0;

  double value() const { return std::exp(log_sum / std::max(count, 1)); }
  Score& operator+=(const Score& o) {
    log_sum += o.log_sum;
    count += o.count;
    return *this;
  }
  friend Score operator+(Score a, const Score& b) { return a += b; }
};

/// Sums log probabilities and constituent counts. Throws on NaN or +inf parts
/// (-inf is the legal zero-probability sentinel).
Score combine_scores(std::span<const Score> parts);

struct Dist {
  std::map<int, long> counts;  // rule id -> count
  long total = 0;
};

// Trigram prediction model: counts of (rule, child-index) pairs conditioned
// on the POS trigram centered at the left-corner word of that child.
// Relative frequency, no smoothing: zeros gate the covered phases.
class PredictionModel {
 public:
  void count(const TrainingEvent& e);

  /// P(rule at child i | trigram); 0 for unseen trigrams or pairs.
  double prob(int rule, int child_index, const Trigram& t) const;
  /// Range-checked variant.
  double predict_prob(const Grammar& g, int rule, int child_index, const Trigram& t) const;

  long total(const Trigram& t) const;
  double min_positive(const Trigram& t) const;  // 0 when the trigram is unseen
  const std::map<std::pair<int, int>, long>* entries(const Trigram& t) const;

  const std::map<Trigram, std::map<std::pair<int, int>, long>>& counts() const {
    return counts_;
  }
  const std::map<Trigram, long>& totals() const { return totals_; }

 private:
  std::map<Trigram, std::map<std::pair<int, int>, long>> counts_;
  std::map<Trigram, long> totals_;
};

// CFG-with-CSP language model: P(rule | parent context, trigram) with a
// strict back-off chain over coarser conditioning levels:
//   0: (parent rule, child position, trigram)
//   1: (parent label, trigram)      -- label kRootLabel for tree roots
//   2: (trigram)
//   3: (lhs)                        -- relative frequency among same-lhs rules
// The finest level with a nonzero total answers the query; if even level 3 is
// empty the distribution is uniform over the grammar's same-lhs rules.
class CspModel {
 public:
  static constexpr int kRootLabel = -1;

  using Level0Key = std::tuple<int, int, int, int, int>;  // rule, pos, t0, t1, t2
  using Level1Key = std::tuple<int, int, int, int>;       // label, t0, t1, t2
  using Level2Key = Trigram;

  void count(const Grammar& g, const TrainingEvent& e);  // child_index 1 events only

  double rule_prob(const Grammar& g, int rule, ParentContext ctx, const Trigram& t) const;
  /// Own-node factor for a constituent whose parent is not yet known: the
  /// root-marker context for start-symbol rules, else the parent-free chain.
  double unattached_prob(const Grammar& g, int rule, const Trigram& t) const;

  const std::map<Level0Key, Dist>& level0() const { return level0_; }
  const std::map<Level1Key, Dist>& level1() const { return level1_; }
  const std::map<Level2Key, Dist>& level2() const { return level2_; }
  const std::map<int, Dist>& level3() const { return level3_; }

 private:
  double parent_free(const Grammar& g, int rule, const Trigram& t) const;

  std::map<Level0Key, Dist> level0_;
  std::map<Level1Key, Dist> level1_;
  std::map<Level2Key, Dist> level2_;
  std::map<int, Dist> level3_;
};

struct Models {
  PredictionModel prediction;
  CspModel csp;
};

Models train_events(std::span<const TrainingEvent> events, const Grammar& g);
Models train_corpus(const std::vector<TreeNode>& corpus, const Grammar& g);

double tree_log_prob(const CspModel& m, const TreeNode& tree, const Grammar& g);
double tree_prob(const CspModel& m, const TreeNode& tree, const Grammar& g);

// Model file: "picky-model v1" header, embedded symbol/rule/lexicon tables,
// then P and level-0 C count records; coarser levels are exact marginals and
// are rebuilt on load.
void save_models(std::ostream& out, const Grammar& g, const Lexicon& lex, const Models& m);
void save_models_path(const std::string& path, const Grammar& g, const Lexicon& lex,
                      const Models& m);

struct ModelFile {
  Grammar grammar;
  Lexicon lexicon;
  Models models;
};

ModelFile load_models(std::istream& in);
ModelFile load_models_path(const std::string& path);

}  // namespace picky

#endif
