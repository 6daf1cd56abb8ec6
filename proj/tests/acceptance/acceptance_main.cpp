// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "picky/eval.hpp"
#include "picky/oracle.hpp"

#include "generators.hpp"

using namespace picky;
using namespace picky::acceptance;

namespace {

std::string data_path(const std::string& name) {
  return std::string(PICKY_TEST_DATA) + "/" + name;
}

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define REQUIRE_TRUE(cond, msg)                                       \
  do {                                                                \
    if (!(cond)) throw Failure(std::string(msg) + " [" #cond "]");    \
  } while (0)

Sentence tags_sentence(const std::vector<std::string>& tags) {
  return Sentence{tags, tags};
}

// Every tag string over `pres` of length 1..max_len.
template <class F>
void each_tag_string(const std::vector<std::string>& pres, int max_len, F&& f) {
  std::vector<std::string> tags;
  std::function<void()> go = [&] {
    if (!tags.empty()) f(tags);
    if (static_cast<int>(tags.size()) == max_len) return;
    for (const auto& p : pres) {
      tags.push_back(p);
      go();
      tags.pop_back();
    }
  };
  go();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// criteria

// 1. Engine/oracle equivalence over all taggable sentences of length <= 8.
void criterion_oracle_equivalence() {
  auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(60);

  std::vector<GrammarFile> grammars;
  std::vector<std::vector<TreeNode>> corpora;
  {
    auto trees = read_treebank_path(data_path("c0.trees"));
    grammars.push_back(induce_grammar(trees));
    corpora.push_back(std::move(trees));
  }
  for (uint32_t seed : {11u, 83u}) {
    TestGrammar tg = make_test_grammar(seed, 24, 12, 0.6);
    grammars.push_back(std::move(tg.gf));
    corpora.push_back(std::move(tg.corpus));
  }

  ParserConfig cfg;
  cfg.stop_on_first_span = false;
  long parsed_total = 0, sentences_total = 0, improvements_total = 0;
  for (size_t gi = 0; gi < grammars.size(); ++gi) {
    const Grammar& g = grammars[gi].grammar;
    Models models = train_corpus(corpora[gi], g);
    each_tag_string(preterminals_of(g), 8, [&](const std::vector<std::string>& tags) {
      ++sentences_total;
      Sentence s = tags_sentence(tags);
      auto best = best_parse_bruteforce(g, s, models.csp, 20000);
      ParseResult r = parse(tag_gold(s, g), g, models, cfg);
      if (!best) {
        REQUIRE_TRUE(r.status != ParseStatus::Parsed,
                     "engine parsed a sentence the oracle rejects");
        return;
      }
      ++parsed_total;
      improvements_total += r.stats.improvements;
      REQUIRE_TRUE(r.status == ParseStatus::Parsed,
                   "engine missed a parse the oracle finds");
      double engine_p = std::exp(r.tree_log_prob);
      REQUIRE_TRUE(std::fabs(engine_p - best->second) <= 1e-9,
                   "engine probability differs from the oracle maximum");
      // identical tree whenever the argmax is unique
      double second = -1.0;
      for (const TreeNode& t : all_parses(g, s, 20000)) {
        double p = tree_prob(models.csp, t, g);
        if (std::fabs(p - best->second) > 1e-9 && p > second) second = p;
        if (!(t == best->first) && std::fabs(p - best->second) <= 1e-9) second = p;
      }
      bool unique = second < best->second - 1e-9;
      if (unique)
        REQUIRE_TRUE(*r.tree == best->first, "argmax tree mismatch on unique argmax");
    });
  }
  REQUIRE_TRUE(parsed_total > 50, "fixture grammars parse too few sentences to be meaningful");
  REQUIRE_TRUE(std::chrono::steady_clock::now() < deadline,
               "oracle equivalence exceeded the 60 s budget");
  std::cerr << "    (" << sentences_total << " sentences, " << parsed_total
            << " parseable, " << improvements_total
            << " Viterbi improvements, 3 grammars)\n";
}

// 2. Every conditional distribution sums to 1 (C0 and 1,000 random trees).
void criterion_normalization() {
  auto check_models = [](const Models& m) {
    for (auto& [t, entries] : m.prediction.counts()) {
      long total = m.prediction.totals().at(t);
      REQUIRE_TRUE(total > 0, "empty prediction context");
      double sum = 0.0;
      for (auto& [key, c] : entries) sum += static_cast<double>(c) / total;
      REQUIRE_TRUE(std::fabs(sum - 1.0) <= 1e-9, "prediction distribution not normalized");
    }
    auto level = [](const auto& lv) {
      for (auto& [key, dist] : lv) {
        double sum = 0.0;
        for (auto& [rule, c] : dist.counts) sum += static_cast<double>(c) / dist.total;
        REQUIRE_TRUE(std::fabs(sum - 1.0) <= 1e-9, "csp level not normalized");
      }
    };
    level(m.csp.level0());
    level(m.csp.level1());
    level(m.csp.level2());
    level(m.csp.level3());
  };

  auto c0 = read_treebank_path(data_path("c0.trees"));
  GrammarFile gf = induce_grammar(c0);
  check_models(train_corpus(c0, gf.grammar));

  TestGrammar tg = make_test_grammar(7u, 1000);
  check_models(train_corpus(tg.corpus, tg.gf.grammar));
}

// 3. Duplicate suppression: the DET-N scenario stores one NP per key and full
// chart scans find no duplicate keys after any fixture parse.
void criterion_dedup() {
  auto trees = read_treebank_path(data_path("c0.trees"));
  GrammarFile gf = induce_grammar(trees);
  Models models = train_corpus(trees, gf.grammar);

  ParserConfig cfg;
  cfg.stop_on_first_span = false;   // let the n-side prediction run its course
  cfg.validate_chart = true;        // throws on any duplicate live key
  cfg.capture_chart_dump = true;
  ParseResult r = parse(tag_gold(tags_sentence({"det", "n", "v"}), gf.grammar),
                        gf.grammar, models, cfg);
  REQUIRE_TRUE(r.status == ParseStatus::Parsed, "fixture sentence failed to parse");
  // exactly one stored NP -> det n constituent over [0,2)
  size_t hits = 0, at = 0;
  while ((at = r.chart_dump->find("[0,2) NP -> det n 1..2", at)) != std::string::npos) {
    ++hits;
    ++at;
  }
  REQUIRE_TRUE(hits == 1, "expected exactly one stored NP edge for the DET-N scenario");

  for (const TreeNode& gold : trees) {
    ParseResult rr = parse(tag_gold(yield_sentence(gold), gf.grammar), gf.grammar,
                           models, cfg);
    REQUIRE_TRUE(rr.status == ParseStatus::Parsed, "fixture parse failed");
  }

  auto dirs = read_treebank_path(data_path("directions.trees"));
  GrammarFile dgf = induce_grammar(dirs);
  Models dmodels = train_corpus(dirs, dgf.grammar);
  std::vector<std::string> restart{"wh", "aux", "pron", "wh", "aux",
                                   "pron", "v",   "p",   "propn"};
  parse(tag_gold(tags_sentence(restart), dgf.grammar), dgf.grammar, dmodels, cfg);
}

// 4. Phase monotonicity on a half-covered generated corpus.
void criterion_phase_monotonicity() {
  TestGrammar tg = make_test_grammar(117u, 50, 12, 0.75);
  const Grammar& g = tg.gf.grammar;
  // train on the first half only, so phases II/III have real work to do
  std::vector<TreeNode> half(tg.corpus.begin(), tg.corpus.begin() + 25);
  Models models = train_corpus(half, g);

  auto parsed_set = [&](PhaseSet ps) {
    std::set<size_t> parsed;
    ParserConfig cfg;
    cfg.phases = ps;
    for (size_t i = 0; i < tg.corpus.size(); ++i) {
      ParseResult r =
          parse(tag_gold(yield_sentence(tg.corpus[i]), g), g, models, cfg);
      if (r.status == ParseStatus::Parsed) parsed.insert(i);
    }
    return parsed;
  };
  std::set<size_t> p1 = parsed_set(PhaseSet{true, false, false});
  std::set<size_t> p12 = parsed_set(PhaseSet{true, true, false});
  std::set<size_t> p123 = parsed_set(PhaseSet{true, true, true});
  REQUIRE_TRUE(std::includes(p12.begin(), p12.end(), p1.begin(), p1.end()),
               "parsed({I}) not a subset of parsed({I,II})");
  REQUIRE_TRUE(std::includes(p123.begin(), p123.end(), p12.begin(), p12.end()),
               "parsed({I,II}) not a subset of parsed({I,II,III})");
  REQUIRE_TRUE(p123.size() == tg.corpus.size(),
               "all phases plus unlimited edges must parse every corpus sentence");
  REQUIRE_TRUE(p12.size() > p1.size(), "corpus exercises no phase-II activity");
  REQUIRE_TRUE(p123.size() > p12.size(), "corpus exercises no phase-III activity");
  std::cerr << "    (parsed " << p1.size() << " -> " << p12.size() << " -> "
            << p123.size() << " of 50)\n";
}

// 5. Covered bypass: the committed hand trace of "the cow mooed" holds and
// phase III proposes nothing when training covers the gold parse.
void criterion_covered_bypass() {
  std::map<std::string, std::string> want;
  {
    std::istringstream in(read_file(data_path("trace_the_cow_mooed.txt")));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string key, value;
      ls >> key >> value;
      want[key] = value;
    }
  }
  auto trees = read_treebank_path(data_path("c0.trees"));
  GrammarFile gf = induce_grammar(trees);
  Models models = train_corpus(trees, gf.grammar);
  TaggedSentence input = tag_gold(tags_sentence({"det", "n", "v"}), gf.grammar);

  ParseResult r = parse(input, gf.grammar, models, ParserConfig{});
  REQUIRE_TRUE(std::to_string(r.stats.predictions) == want.at("predictions"),
               "prediction count differs from the committed trace");
  REQUIRE_TRUE(std::to_string(r.stats.completions) == want.at("completions"),
               "completion count differs from the committed trace");
  REQUIRE_TRUE(std::to_string(r.stats.edges_created) == want.at("edges_created"),
               "edge count differs from the committed trace");
  REQUIRE_TRUE(status_name(r.status) == want.at("status"), "status differs");
  REQUIRE_TRUE(phase_name(r.phase_reached) == want.at("phase"), "phase differs");

  ParserConfig full;
  full.stop_on_first_span = false;
  ParseResult q = parse(input, gf.grammar, models, full);
  REQUIRE_TRUE(std::to_string(q.stats.predictions) == want.at("quiesced_predictions"),
               "quiesced prediction count differs");
  REQUIRE_TRUE(std::to_string(q.stats.completions) == want.at("quiesced_completions"),
               "quiesced completion count differs");
  REQUIRE_TRUE(std::to_string(q.stats.edges_created) == want.at("quiesced_edges_created"),
               "quiesced edge count differs");
  REQUIRE_TRUE(std::to_string(q.stats.predictions_by_phase[2]) ==
                   want.at("quiesced_phase3_predictions"),
               "phase III proposed predictions on a covered sentence");
  REQUIRE_TRUE(std::to_string(q.stats.edges_by_phase[2]) ==
                   want.at("quiesced_phase3_edges"),
               "phase III created edges on a covered sentence");

  // every covered fixture sentence parses in phase I, so under the default
  // configuration phase III proposes nothing for any of them
  for (const TreeNode& gold : trees) {
    ParseResult rr = parse(tag_gold(yield_sentence(gold), gf.grammar), gf.grammar,
                           models, ParserConfig{});
    REQUIRE_TRUE(rr.phase_reached == Phase::I, "covered sentence left phase I");
    REQUIRE_TRUE(rr.stats.predictions_by_phase[2] == 0 &&
                     rr.stats.edges_by_phase[2] == 0,
                 "phase III proposed work on a covered sentence");
  }
}

// 6. Edge budgets: never exceeded, and per-sentence predictions are monotone
// nonincreasing as the limit decreases across the sweep grid.
void criterion_edge_budget() {
  std::vector<long> grid{100, 150, 300, 500, 1000, 15000};
  std::vector<long> tight{1, 2, 3, 5, 8, 13, 21, 34};

  auto trees = read_treebank_path(data_path("c0.trees"));
  GrammarFile gf = induce_grammar(trees);
  Models models = train_corpus(trees, gf.grammar);

  TestGrammar tg = make_test_grammar(57u, 30);
  Models rmodels = train_corpus(tg.corpus, tg.gf.grammar);

  struct Case {
    const Grammar* g;
    const Models* m;
    Sentence s;
  };
  std::vector<Case> cases;
  for (const TreeNode& t : trees) cases.push_back({&gf.grammar, &models, yield_sentence(t)});
  for (size_t i = 0; i < tg.corpus.size(); i += 3)
    cases.push_back({&tg.gf.grammar, &rmodels, yield_sentence(tg.corpus[i])});

  std::mt19937 rng(4242);
  std::vector<PhaseSet> somesets{PhaseSet{true, false, false}, PhaseSet{false, true, false},
                                 PhaseSet{true, true, false}, PhaseSet{false, false, true},
                                 PhaseSet{true, true, true}};
  for (const Case& c : cases) {
    TaggedSentence in = tag_gold(c.s, *c.g);
    // budget respected for arbitrary configs
    for (long limit : tight) {
      ParserConfig cfg;
      cfg.phases = somesets[rng() % somesets.size()];
      cfg.max_edges = limit;
      cfg.stop_on_first_span = rng() % 2 == 0;
      ParseResult r = parse(in, *c.g, *c.m, cfg);
      REQUIRE_TRUE(r.stats.edges_created <= limit, "edge budget exceeded");
    }
    // monotone predictions over the published grid
    long prev = -1;
    for (long limit : grid) {
      ParserConfig cfg;
      cfg.max_edges = limit;
      cfg.stop_on_first_span = false;
      ParseResult r = parse(in, *c.g, *c.m, cfg);
      REQUIRE_TRUE(r.stats.edges_created <= limit, "edge budget exceeded on grid");
      REQUIRE_TRUE(r.stats.predictions >= prev, "predictions not monotone in the limit");
      prev = r.stats.predictions;
    }
  }
}

// 7. Scoring identities.
void criterion_scoring() {
  auto trees = read_treebank_path(data_path("c0.trees"));
  GrammarFile gf = induce_grammar(trees);
  Models models = train_corpus(trees, gf.grammar);

  for (const TreeNode& t : trees) {
    double log_sum = tree_log_prob(models.csp, t, gf.grammar);
    int nodes = internal_node_count(t);
    Score s{log_sum, nodes};
    REQUIRE_TRUE(std::fabs(s.value() - std::exp(log_sum / nodes)) <= 1e-9,
                 "geometric mean mismatch");
  }
  Score single{std::log(0.37), 1};
  REQUIRE_TRUE(single.value() == 0.37, "single-constituent score must equal its probability");

  std::mt19937 rng(99);
  std::uniform_real_distribution<double> prob(0.001, 1.0);
  for (int round = 0; round < 200; ++round) {
    std::vector<Score> parts;
    int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) parts.push_back(Score{std::log(prob(rng)), 1});
    Score flat = combine_scores(parts);
    size_t split = 1 + rng() % n;
    std::vector<Score> nested{
        combine_scores(std::span(parts).subspan(0, split)),
        combine_scores(std::span(parts).subspan(split))};
    Score two = combine_scores(nested);
    REQUIRE_TRUE(std::fabs(two.log_sum - flat.log_sum) <= 1e-12,
                 "combine_scores not associative within 1e-12");
    REQUIRE_TRUE(two.count == flat.count, "constituent counts must add");
  }
}

// 8. Robust partial parse of the restart sentence.
void criterion_partial_parse() {
  auto trees = read_treebank_path(data_path("directions.trees"));
  GrammarFile gf = induce_grammar(trees);
  Models models = train_corpus(trees, gf.grammar);

  std::vector<std::string> words{"how", "do", "I", "how", "do", "I", "get", "to", "MIT"};
  ParserConfig cfg;
  cfg.capture_chart_dump = true;
  ParseResult r = parse_words(words, gf.grammar, gf.lexicon, models, cfg);
  REQUIRE_TRUE(r.status == ParseStatus::Partial, "restart sentence must yield a partial");
  Sentence span = yield_sentence(*r.tree);
  REQUIRE_TRUE(span.words.size() == 6, "partial tree must span six words");
  REQUIRE_TRUE((span.words == std::vector<std::string>{"how", "do", "I", "get", "to",
                                                       "MIT"}),
               "partial tree must cover the last six words");

  // the returned tree is the maximal-score completed S in the chart: the
  // chart contains exactly one complete S constituent
  size_t complete_s = 0;
  std::istringstream dump(*r.chart_dump);
  std::string line;
  while (std::getline(dump, line))
    if (line.find(" S -> ") != std::string::npos &&
        line.find("1..1") != std::string::npos)
      ++complete_s;
  REQUIRE_TRUE(complete_s == 1, "expected a unique completed S constituent");
}

// 9. Report fidelity: byte-stable table renderings plus the Table-2 identity.
void criterion_report_fidelity() {
  std::vector<EvalRow> t1{
      {"I", 1.95, 1.02, 75.7, 2.3, 22.0, 300},
      {"I,II", 2.15, 0.94, 77.0, 2.3, 20.7, 300},
      {"II", 2.44, 0.86, 77.3, 2.0, 20.7, 300},
      {"I,III", 4.01, 1.44, 88.3, 11.7, 0.0, 300},
      {"III", 4.29, 1.40, 88.7, 11.3, 0.0, 300},
      {"I,II,III", 4.30, 1.28, 89.3, 10.7, 0.0, 300},
      {"II,III", 4.59, 1.24, 89.7, 10.3, 0.0, 300},
  };
  REQUIRE_TRUE(render_eval_table(t1, false) == read_file(data_path("golden/table1.txt")),
               "phase table rendering is not byte-identical to the golden file");

  std::vector<PhaseAccuracyRow> t2{
      {"I + II", 238, 97.0, 77.0, 3.0},
      {"III", 62, 60.0, 12.0, 40.0},
      {"Overall", 300, 89.3, 89.3, 10.7},
  };
  REQUIRE_TRUE(render_phase_accuracy_table(t2) ==
                   read_file(data_path("golden/table2.txt")),
               "phase-accuracy table rendering is not byte-identical");

  std::vector<EvalRow> t3{
      {"15000", 4.30, 1.35, 89.3, 10.7, 0.0, 300},
      {"1000", 3.69, 0.93, 83.3, 7.0, 9.7, 300},
      {"500", 3.08, 0.82, 80.3, 5.3, 14.4, 300},
      {"300", 2.50, 0.86, 79.3, 2.7, 18.0, 300},
      {"150", 1.95, 0.92, 66.0, 1.7, 32.3, 300},
      {"100", 1.60, 0.84, 43.7, 1.7, 54.6, 300},
  };
  REQUIRE_TRUE(render_eval_table(t3, true) == read_file(data_path("golden/table3.txt")),
               "edge-count table rendering is not byte-identical");

  // Table-2 arithmetic identity on generated corpora: per-phase accuracy
  // times the phase fraction contributes the coverage, within one sentence.
  for (uint32_t seed : {117u, 57u}) {
    TestGrammar tg = make_test_grammar(seed, 50, 12, 0.75);
    std::vector<TreeNode> half(tg.corpus.begin(), tg.corpus.begin() + 25);
    Models models = train_corpus(half, tg.gf.grammar);
    auto rows = accuracy_by_phase(tg.corpus, tg.gf.grammar, models, ParserConfig{});
    long total = rows.back().n;
    for (const auto& row : rows) {
      double correct_from_acc = row.accuracy / 100.0 * row.n;
      double correct_from_cov = row.coverage / 100.0 * total;
      REQUIRE_TRUE(std::fabs(correct_from_acc - correct_from_cov) <= 1.0,
                   "Table-2 identity violated");
    }
    REQUIRE_TRUE(rows.back().accuracy == rows.back().coverage,
                 "overall accuracy must equal overall coverage");
  }
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    void (*body)();
  };
  const Criterion criteria[] = {
      {1, "oracle equivalence (phases I,II,III vs brute force, length <= 8)",
       criterion_oracle_equivalence},
      {2, "model normalization (C0 and 1,000 random trees)", criterion_normalization},
      {3, "duplicate-edge suppression and chart key uniqueness", criterion_dedup},
      {4, "phase monotonicity on a half-covered corpus", criterion_phase_monotonicity},
      {5, "covered bypass and the committed fixture trace", criterion_covered_bypass},
      {6, "edge budgets and sweep monotonicity", criterion_edge_budget},
      {7, "geometric-mean scoring identities", criterion_scoring},
      {8, "robust partial parse of the restart sentence", criterion_partial_parse},
      {9, "report fidelity and Table-2 arithmetic", criterion_report_fidelity},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.body();
      auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
      std::cout << "PASS  " << c.id << "  " << c.name << "  (" << ms << " ms)\n";
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "FAIL  " << c.id << "  " << c.name << ": " << e.what() << "\n";
    }
  }
  return failures == 0 ? 0 : 1;
}
