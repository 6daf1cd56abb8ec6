#ifndef PICKY_ORACLE_HPP
#define PICKY_ORACLE_HPP

#include <optional>

#include "picky/models.hpp"

namespace picky {

// Exhaustive ground-truth parser for desk-scale grammars. Deliberately naive:
// it enumerates every parse tree by dynamic programming over spans with a
// bounded unary closure, for use as the correctness oracle in tests and in
// the `oracle` CLI subcommand.

struct CapExceeded : Error {
  explicit CapExceeded(long cap)
      : Error("oracle tree cap of " + std::to_string(cap) + " exceeded") {}
};

/// Every full-span start-symbol parse of the tagged sentence. `words` and
/// `tags` must be parallel; tags are symbol names. Throws CapExceeded when
/// the total number of enumerated trees passes `cap`.
std::vector<TreeNode> all_parses(const Grammar& g, const Sentence& sentence,
                                 long cap = 10000);

/// argmax of tree_prob over all_parses; ties resolved like chart.best_complete
/// (first enumerated wins). nullopt when the sentence has no parse.
std::optional<std::pair<TreeNode, double>> best_parse_bruteforce(
    const Grammar& g, const Sentence& sentence, const CspModel& csp, long cap = 10000);

}  // namespace picky

#endif
