#ifndef PICKY_TESTS_FIXTURES_HPP
#define PICKY_TESTS_FIXTURES_HPP

#include <string>
#include <vector>

#include "picky/eval.hpp"
#include "picky/models.hpp"
#include "picky/oracle.hpp"

namespace picky::test {

inline std::string data_path(const std::string& name) {
  return std::string(PICKY_TEST_DATA) + "/" + name;
}

struct Fixture {
  GrammarFile gf;
  std::vector<TreeNode> trees;
  Models models;
};

inline Fixture load_fixture(const std::string& treebank) {
  Fixture f;
  f.trees = read_treebank_path(data_path(treebank));
  f.gf = induce_grammar(f.trees);
  f.models = train_corpus(f.trees, f.gf.grammar);
  return f;
}

inline const Fixture& c0() {
  static Fixture f = load_fixture("c0.trees");
  return f;
}

inline const Fixture& directions() {
  static Fixture f = load_fixture("directions.trees");
  return f;
}

inline const Fixture& ambig() {
  static Fixture f = load_fixture("ambig.trees");
  return f;
}

inline Trigram tri(const Grammar& g, const std::string& a, const std::string& b,
                   const std::string& c) {
  auto id = [&](const std::string& n) {
    if (n == "<bos>") return g.bos();
    if (n == "<eos>") return g.eos();
    return g.symbol_id(n);
  };
  return Trigram{id(a), id(b), id(c)};
}

inline int rule_id(const Grammar& g, const std::string& text) {
  for (const Rule& r : g.rules())
    if (g.rule_text(r.id) == text) return r.id;
  throw Error("no such rule in fixture grammar: " + text);
}

inline Sentence make_sentence(const std::vector<std::string>& words,
                              const std::vector<std::string>& tags) {
  return Sentence{words, tags};
}

/// Pre-tagged sentence where each word is its own tag name.
inline Sentence tags_only(const std::vector<std::string>& tags) {
  return Sentence{tags, tags};
}

}  // namespace picky::test

#endif
