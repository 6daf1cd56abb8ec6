// picky: train, parse, evaluate, sweep, oracle.

#include <CLI11.hpp>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "picky/eval.hpp"
#include "picky/oracle.hpp"

using namespace picky;

namespace {

struct SharedFlags {
  std::string grammar_path;
  std::string model_path;
  std::string phases = "I,II,III";
  std::string max_edges = "unlimited";
  double min_score = 0.0;
  bool allow_partial = false;
  bool stats = false;
  std::string format = "text";
  int jobs = 1;
};

void add_parser_flags(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--phases", f.phases, "Comma-separated phase subset, e.g. I,II,III");
  cmd->add_option("--max-edges", f.max_edges, "Edge budget (integer or 'unlimited')");
  cmd->add_option("--min-score", f.min_score, "Score floor in (0,1]; 0 disables");
  cmd->add_option("--jobs", f.jobs, "Parallel sentence workers")->check(CLI::PositiveNumber);
}

ParserConfig make_config(const SharedFlags& f) {
  ParserConfig cfg;
  cfg.phases = PhaseSet::parse(f.phases);
  if (f.max_edges == "unlimited") {
    cfg.max_edges = 0;
  } else {
    try {
      size_t used = 0;
      cfg.max_edges = std::stol(f.max_edges, &used);
      if (used != f.max_edges.size() || cfg.max_edges <= 0) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw Error("--max-edges expects a positive integer or 'unlimited'");
    }
  }
  if (f.min_score > 0.0) cfg.min_score = f.min_score;
  cfg.capture_chart_dump = [] {
    const char* v = std::getenv("PICKY_LOG");
    return v && std::string(v) == "debug";
  }();
  return cfg;
}

std::vector<std::string> split_tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> toks;
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

// Input line: either pre-tagged "word_TAG ..." or raw words for the lexicon.
TaggedSentence read_input_line(const std::string& line, const Grammar& g,
                               const Lexicon& lex, int* gap) {
  std::vector<std::string> toks = split_tokens(line);
  bool tagged = false;
  for (const auto& t : toks)
    if (t.find('_') != std::string::npos) tagged = true;
  *gap = -1;
  if (!tagged) return tag_with_lexicon(toks, lex, gap);
  Sentence s;
  for (const auto& t : toks) {
    size_t us = t.rfind('_');
    if (us == std::string::npos || us == 0 || us + 1 == t.size())
      throw Error("pre-tagged token must look like word_TAG: " + t);
    s.words.push_back(t.substr(0, us));
    s.tags.push_back(t.substr(us + 1));
  }
  return tag_gold(s, g);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines;
  std::string line;
  if (path.empty() || path == "-") {
    while (std::getline(std::cin, line))
      if (!line.empty()) lines.push_back(line);
  } else {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    while (std::getline(in, line))
      if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

ModelFile load_model_checked(const SharedFlags& f) {
  if (f.model_path.empty()) throw CLI::ValidationError("--model is required");
  ModelFile mf = load_models_path(f.model_path);
  if (!f.grammar_path.empty()) {
    GrammarFile gf = load_grammar_path(f.grammar_path);
    if (serialize(gf.grammar, gf.lexicon) != serialize(mf.grammar, mf.lexicon))
      throw Error("--grammar disagrees with the tables embedded in " + f.model_path);
  }
  return mf;
}

int cmd_train(const std::string& treebank, const std::string& grammar_path,
              const std::string& out, const std::string& grammar_out) {
  std::vector<TreeNode> trees = read_treebank_path(treebank);
  GrammarFile gf;
  if (grammar_path.empty()) {
    gf = induce_grammar(trees);
    std::string gpath = grammar_out.empty() ? out + ".grammar" : grammar_out;
    std::ofstream g(gpath);
    if (!g) throw Error("cannot write " + gpath);
    g << serialize(gf.grammar, gf.lexicon);
    std::cerr << "induced grammar with " << gf.grammar.rules().size() << " rules -> "
              << gpath << "\n";
  } else {
    gf = load_grammar_path(grammar_path);
    for (size_t i = 0; i < trees.size(); ++i) {
      try {
        validate_tree(trees[i], gf.grammar);
      } catch (const Error& e) {
        throw Error("tree " + std::to_string(i + 1) + " of " + treebank +
                    " does not validate: " + e.what());
      }
    }
  }
  Models m = train_corpus(trees, gf.grammar);
  save_models_path(out, gf.grammar, gf.lexicon, m);
  std::cerr << "trained on " << trees.size() << " trees -> " << out << "\n";
  return 0;
}

int cmd_parse(const SharedFlags& f, const std::string& input) {
  ModelFile mf = load_model_checked(f);
  ParserConfig cfg = make_config(f);
  std::vector<std::string> lines = read_lines(input);
  int exit_code = 0;

  // parse in parallel, print in input order
  std::vector<ParseResult> results(lines.size());
  std::vector<std::string> notes(lines.size());
  auto one = [&](size_t i) {
    int gap = -1;
    TaggedSentence ts = read_input_line(lines[i], mf.grammar, mf.lexicon, &gap);
    if (gap >= 0) {
      results[i].status = ParseStatus::LexicalGap;
      notes[i] = "unknown word '" + split_tokens(lines[i])[gap] + "'";
    } else {
      results[i] = parse(ts, mf.grammar, mf.models, cfg);
    }
  };
  if (f.jobs <= 1 || lines.size() < 2) {
    for (size_t i = 0; i < lines.size(); ++i) one(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int t = 0; t < f.jobs; ++t)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < lines.size(); i = next.fetch_add(1)) {
          try {
            one(i);
          } catch (...) {
            std::lock_guard lock(err_mu);
            if (!err) err = std::current_exception();
            return;
          }
        }
      });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
  }

  for (size_t i = 0; i < lines.size(); ++i) {
    const ParseResult& r = results[i];
    const std::string& note = notes[i];
    switch (r.status) {
      case ParseStatus::Parsed:
        std::cout << bracketed(*r.tree) << "\n";
        break;
      case ParseStatus::Partial:
        if (f.allow_partial)
          std::cout << "PARTIAL(" << bracketed(*r.tree) << ")\n";
        else
          std::cout << "NOPARSE\n";
        exit_code = 1;
        break;
      case ParseStatus::NoParse:
        std::cout << "NOPARSE\n";
        exit_code = 1;
        break;
      case ParseStatus::LexicalGap:
        std::cout << "LEXGAP" << (note.empty() ? "" : " # " + note) << "\n";
        exit_code = 1;
        break;
    }
    if (f.stats)
      std::cout << "# phase=" << phase_name(r.phase_reached)
                << " predictions=" << r.stats.predictions
                << " completions=" << r.stats.completions
                << " edges=" << r.stats.edges_created << "\n";
    if (r.chart_dump) std::cerr << *r.chart_dump;
  }
  return exit_code;
}

int cmd_eval(const SharedFlags& f, const std::string& treebank, bool per_sentence,
             const std::string& overrides_path) {
  ModelFile mf = load_model_checked(f);
  std::vector<TreeNode> gold = read_treebank_path(treebank);
  ParserConfig cfg = make_config(f);
  EvalOptions opt;
  opt.jobs = f.jobs;
  if (!overrides_path.empty())
    for (const std::string& line : read_lines(overrides_path))
      opt.overrides.insert(std::stoul(line));

  auto outcomes = run_corpus(gold, mf.grammar, mf.models, cfg, opt);
  EvalRow row = aggregate(outcomes, cfg.phases.str());
  if (f.format == "csv")
    std::cout << render_csv({row});
  else
    std::cout << render_eval_table({row}, false);
  std::cout << render_phase_accuracy_table(
      accuracy_by_phase(gold, mf.grammar, mf.models, cfg, opt));
  if (per_sentence) {
    std::cout << "# sentence probability correct\n";
    for (size_t i = 0; i < outcomes.size(); ++i)
      std::cout << i << " " << std::exp(outcomes[i].result.tree_log_prob) << " "
                << (outcomes[i].correct ? 1 : 0) << "\n";
  }
  return 0;
}

int cmd_sweep(const SharedFlags& f, const std::string& treebank, bool sweep_phases_flag,
              const std::string& sweep_edges) {
  ModelFile mf = load_model_checked(f);
  std::vector<TreeNode> gold = read_treebank_path(treebank);
  ParserConfig base = make_config(f);
  EvalOptions opt;
  opt.jobs = f.jobs;

  std::vector<EvalRow> rows;
  bool edges = !sweep_edges.empty();
  if (sweep_phases_flag) {
    rows = sweep_phases(gold, mf.grammar, mf.models, base, default_phase_grid(), opt);
  } else if (edges) {
    std::vector<long> limits;
    std::istringstream in(sweep_edges);
    std::string tok;
    while (std::getline(in, tok, ','))
      limits.push_back(tok == "unlimited" ? 0 : std::stol(tok));
    rows = sweep_edge_limit(gold, mf.grammar, mf.models, base, limits, opt);
  } else {
    throw CLI::ValidationError("sweep", "needs --sweep-phases or --sweep-edges");
  }
  if (f.format == "csv")
    std::cout << render_csv(rows);
  else
    std::cout << render_eval_table(rows, edges);
  return 0;
}

int cmd_oracle(const SharedFlags& f, const std::string& sentence_text, long cap) {
  ModelFile mf = load_model_checked(f);
  int gap = -1;
  TaggedSentence ts = read_input_line(sentence_text, mf.grammar, mf.lexicon, &gap);
  if (gap >= 0) {
    std::cout << "LEXGAP\n";
    return 1;
  }
  Sentence s;
  s.words = ts.words;
  for (const auto& tags : ts.tags) {
    if (tags.size() != 1)
      throw Error("oracle needs unambiguous tags; pre-tag the input as word_TAG");
    s.tags.push_back(mf.grammar.name(tags[0]));
  }
  std::vector<TreeNode> parses = all_parses(mf.grammar, s, cap);
  std::vector<std::pair<double, const TreeNode*>> scored;
  for (const TreeNode& t : parses)
    scored.emplace_back(tree_prob(mf.models.csp, t, mf.grammar), &t);
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::cout << parses.size() << " parses\n";
  for (auto& [p, t] : scored) std::cout << p << "\t" << bracketed(*t) << "\n";
  return parses.empty() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"picky: probabilistic three-phase chart parser"};
  app.require_subcommand(1);
  SharedFlags f;

  auto* train = app.add_subcommand("train", "Train models from a treebank");
  std::string treebank, out, grammar_out;
  train->add_option("--treebank", treebank, "Bracketed training trees")->required();
  train->add_option("--grammar", f.grammar_path, "Grammar file (induced when absent)");
  train->add_option("--out", out, "Model output path")->required();
  train->add_option("--grammar-out", grammar_out, "Where to write an induced grammar");

  auto* parse_cmd = app.add_subcommand("parse", "Parse sentences from a file or stdin");
  std::string input;
  parse_cmd->add_option("--model", f.model_path, "Model file")->required();
  parse_cmd->add_option("--grammar", f.grammar_path, "Optional grammar cross-check");
  parse_cmd->add_option("--input", input, "Sentence file ('-' for stdin)");
  parse_cmd->add_flag("--allow-partial", f.allow_partial,
                      "Print the best partial S when no full parse exists");
  parse_cmd->add_flag("--stats", f.stats, "Print a stats line per sentence");
  add_parser_flags(parse_cmd, f);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate against a gold treebank");
  std::string eval_treebank, overrides;
  bool per_sentence = false;
  eval_cmd->add_option("--model", f.model_path, "Model file")->required();
  eval_cmd->add_option("--grammar", f.grammar_path, "Optional grammar cross-check");
  eval_cmd->add_option("--treebank", eval_treebank, "Gold trees")->required();
  eval_cmd->add_option("--format", f.format, "text|csv")
      ->check(CLI::IsMember({"text", "csv"}));
  eval_cmd->add_flag("--per-sentence", per_sentence,
                     "Emit per-sentence (probability, correct) pairs");
  eval_cmd->add_option("--overrides", overrides,
                       "File of sentence indexes adjudicated correct");
  add_parser_flags(eval_cmd, f);

  auto* sweep = app.add_subcommand("sweep", "Phase or edge-limit sweeps");
  std::string sweep_treebank, sweep_edges;
  bool sweep_phases_flag = false;
  sweep->add_option("--model", f.model_path, "Model file")->required();
  sweep->add_option("--grammar", f.grammar_path, "Optional grammar cross-check");
  sweep->add_option("--treebank", sweep_treebank, "Gold trees")->required();
  sweep->add_flag("--sweep-phases", sweep_phases_flag, "Run the 7-row phase grid");
  sweep->add_option("--sweep-edges", sweep_edges,
                    "Comma-separated edge limits, e.g. 100,150,300,500,1000,15000");
  sweep->add_option("--format", f.format, "text|csv")
      ->check(CLI::IsMember({"text", "csv"}));
  add_parser_flags(sweep, f);

  auto* oracle_cmd =
      app.add_subcommand("oracle", "Enumerate all parses with probabilities");
  std::string sentence;
  long cap = 10000;
  oracle_cmd->add_option("--model", f.model_path, "Model file")->required();
  oracle_cmd->add_option("--grammar", f.grammar_path, "Optional grammar cross-check");
  oracle_cmd->add_option("--cap", cap, "Maximum number of trees");
  oracle_cmd->add_option("sentence", sentence, "Sentence (raw or word_TAG)")->required();

  try {
    app.parse(argc, argv);
    if (train->parsed()) return cmd_train(treebank, f.grammar_path, out, grammar_out);
    if (parse_cmd->parsed()) return cmd_parse(f, input);
    if (eval_cmd->parsed()) return cmd_eval(f, eval_treebank, per_sentence, overrides);
    if (sweep->parsed()) return cmd_sweep(f, sweep_treebank, sweep_phases_flag, sweep_edges);
    if (oracle_cmd->parsed()) return cmd_oracle(f, sentence, cap);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "picky: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
