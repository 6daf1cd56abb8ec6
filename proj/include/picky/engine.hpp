#ifndef PICKY_ENGINE_HPP
#define PICKY_ENGINE_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "picky/chart.hpp"

namespace picky {

struct PhaseSet {
  bool i = true, ii = true, iii = true;

  bool has(Phase p) const {
    switch (p) {
      case Phase::I: return i;
      case Phase::II: return ii;
      default: return iii;
    }
  }
  bool any() const { return i || ii || iii; }
  std::string str() const;
  static PhaseSet parse(std::string_view text);  // "I,II,III"
  bool operator==(const PhaseSet&) const = default;
};

struct ParserConfig {
  PhaseSet phases;
  long max_edges = 0;  // <= 0: unlimited
  std::optional<double> min_score;
  bool stop_on_first_span = true;
  bool capture_chart_dump = false;
  bool validate_chart = false;  // full index/dedup rescan after the parse
};

enum class ParseStatus { Parsed, Partial, NoParse, LexicalGap };

const char* status_name(ParseStatus s);

struct ParseStats {
  long predictions = 0;
  long completions = 0;
  long edges_created = 0;
  long improvements = 0;
  std::optional<long> needed_constituents;
  std::array<long, 3> predictions_by_phase{0, 0, 0};
  std::array<long, 3> edges_by_phase{0, 0, 0};
};

struct ParseResult {
  ParseStatus status = ParseStatus::NoParse;
  std::optional<TreeNode> tree;  // full parse, or best partial S when Partial
  Phase phase_reached = Phase::I;
  ParseStats stats;
  double tree_log_prob = 0.0;  // raw Eq.-1 log probability of the returned tree
  std::optional<std::string> chart_dump;
};

// Engine input: words with one or more candidate tags per position.
struct TaggedSentence {
  std::vector<std::string> words;
  std::vector<std::vector<int>> tags;  // nonempty, sorted, unique per position
  size_t size() const { return words.size(); }
};

/// Resolves gold tags against the grammar. Throws on undeclared tags.
TaggedSentence tag_gold(const Sentence& s, const Grammar& g);
/// Looks words up in the lexicon; returns the index of the first unknown word
/// via gap_index (-1 when fully covered).
TaggedSentence tag_with_lexicon(const std::vector<std::string>& words,
                                const Lexicon& lex, int* gap_index);

ParseResult parse(const TaggedSentence& input, const Grammar& g, const Models& m,
                  const ParserConfig& cfg);

/// Lexicon-tagged convenience wrapper; returns LexicalGap on unknown words.
ParseResult parse_words(const std::vector<std::string>& words, const Grammar& g,
                        const Lexicon& lex, const Models& m, const ParserConfig& cfg);

}  // namespace picky

#endif
