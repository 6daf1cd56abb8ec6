// _picky: python bindings for the main operations (train, parse, evaluate,
// sweep, brute-force oracle).

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "picky/eval.hpp"
#include "picky/oracle.hpp"

namespace py = pybind11;
using namespace picky;

namespace {

ParserConfig config_from(const std::string& phases, long max_edges,
                         std::optional<double> min_score, bool stop_on_first_span) {
  ParserConfig cfg;
  cfg.phases = PhaseSet::parse(phases);
  cfg.max_edges = max_edges;
  cfg.min_score = min_score;
  cfg.stop_on_first_span = stop_on_first_span;
  return cfg;
}

py::dict stats_dict(const ParseStats& s) {
  py::dict d;
  d["predictions"] = s.predictions;
  d["completions"] = s.completions;
  d["edges_created"] = s.edges_created;
  d["improvements"] = s.improvements;
  if (s.needed_constituents) d["needed_constituents"] = *s.needed_constituents;
  d["predictions_by_phase"] = s.predictions_by_phase;
  d["edges_by_phase"] = s.edges_by_phase;
  return d;
}

py::dict result_dict(const ParseResult& r) {
  py::dict d;
  d["status"] = std::string(status_name(r.status));
  d["phase"] = std::string(phase_name(r.phase_reached));
  d["tree"] = r.tree ? py::object(py::cast(*r.tree)) : py::object(py::none());
  d["log_prob"] = r.tree_log_prob;
  d["stats"] = stats_dict(r.stats);
  return d;
}

py::dict row_dict(const EvalRow& row) {
  py::dict d;
  d["config"] = row.config;
  d["pred_ratio"] = row.pred_ratio;
  d["comp_ratio"] = row.comp_ratio;
  d["coverage"] = row.coverage;
  d["pct_error"] = row.pct_error;
  d["pct_no_parse"] = row.pct_no_parse;
  d["n"] = row.n;
  return d;
}

// Grammar, lexicon and models bundled the way every operation consumes them.
struct Session {
  GrammarFile gf;
  Models models;

  static Session train(const std::string& treebank_text,
                       std::optional<std::string> grammar_text) {
    Session s;
    std::vector<TreeNode> trees = read_treebank(treebank_text);
    if (grammar_text) {
      s.gf = load_grammar(*grammar_text);
      for (const TreeNode& t : trees) validate_tree(t, s.gf.grammar);
    } else {
      s.gf = induce_grammar(trees);
    }
    s.models = train_corpus(trees, s.gf.grammar);
    return s;
  }

  static Session load(const std::string& path) {
    ModelFile mf = load_models_path(path);
    return Session{GrammarFile{std::move(mf.grammar), std::move(mf.lexicon)},
                   std::move(mf.models)};
  }

  void save(const std::string& path) const {
    save_models_path(path, gf.grammar, gf.lexicon, models);
  }

  std::string grammar_text() const { return serialize(gf.grammar, gf.lexicon); }

  py::dict parse_words_py(const std::vector<std::string>& words,
                          const std::string& phases, long max_edges,
                          std::optional<double> min_score, bool stop_on_first_span) {
    return result_dict(parse_words(
        words, gf.grammar, gf.lexicon, models,
        config_from(phases, max_edges, min_score, stop_on_first_span)));
  }

  py::dict parse_tagged_py(const std::vector<std::string>& words,
                           const std::vector<std::string>& tags,
                           const std::string& phases, long max_edges,
                           std::optional<double> min_score, bool stop_on_first_span) {
    TaggedSentence in = tag_gold(Sentence{words, tags}, gf.grammar);
    return result_dict(
        parse(in, gf.grammar, models,
              config_from(phases, max_edges, min_score, stop_on_first_span)));
  }

  py::dict evaluate_py(const std::string& treebank_text, const std::string& phases,
                       long max_edges, int jobs) {
    std::vector<TreeNode> gold = read_treebank(treebank_text);
    EvalOptions opt;
    opt.jobs = jobs;
    return row_dict(evaluate(gold, gf.grammar, models,
                             config_from(phases, max_edges, std::nullopt, true), opt));
  }

  std::vector<std::pair<double, TreeNode>> oracle_parses(
      const std::vector<std::string>& words, const std::vector<std::string>& tags,
      long cap) {
    std::vector<std::pair<double, TreeNode>> out;
    for (TreeNode& t : all_parses(gf.grammar, Sentence{words, tags}, cap))
      out.emplace_back(tree_prob(models.csp, t, gf.grammar), std::move(t));
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    return out;
  }

  double tree_probability(const TreeNode& t) const {
    return tree_prob(models.csp, t, gf.grammar);
  }
};

}  // namespace

PYBIND11_MODULE(_picky, m) {
  m.doc() = "Trainable three-phase probabilistic chart parser";

  py::register_exception<Error>(m, "PickyError");

  py::class_<TreeNode>(m, "Tree")
      .def(py::init([](const std::string& text) { return parse_tree_text(text); }),
           py::arg("text"))
      .def_readonly("label", &TreeNode::label)
      .def_readonly("children", &TreeNode::children)
      .def_readonly("word", &TreeNode::word)
      .def_readonly("word_index", &TreeNode::word_index)
      .def_property_readonly("is_leaf", &TreeNode::is_leaf)
      .def("bracketed", [](const TreeNode& t) { return bracketed(t); })
      .def("yield_words",
           [](const TreeNode& t) { return yield_sentence(t).words; })
      .def("yield_tags", [](const TreeNode& t) { return yield_sentence(t).tags; })
      .def("internal_nodes", [](const TreeNode& t) { return internal_node_count(t); })
      .def("__eq__", [](const TreeNode& a, const TreeNode& b) { return a == b; })
      .def("__repr__", [](const TreeNode& t) { return bracketed(t); });

  py::class_<Session>(m, "Parser")
      .def_static("train", &Session::train, py::arg("treebank"),
                  py::arg("grammar") = py::none(),
                  "Train from bracketed trees; induces the grammar when none is given")
      .def_static("load", &Session::load, py::arg("path"))
      .def("save", &Session::save, py::arg("path"))
      .def("grammar_text", &Session::grammar_text)
      .def("parse", &Session::parse_words_py, py::arg("words"),
           py::arg("phases") = "I,II,III", py::arg("max_edges") = 0,
           py::arg("min_score") = py::none(), py::arg("stop_on_first_span") = true)
      .def("parse_tagged", &Session::parse_tagged_py, py::arg("words"),
           py::arg("tags"), py::arg("phases") = "I,II,III", py::arg("max_edges") = 0,
           py::arg("min_score") = py::none(), py::arg("stop_on_first_span") = true)
      .def("evaluate", &Session::evaluate_py, py::arg("treebank"),
           py::arg("phases") = "I,II,III", py::arg("max_edges") = 0,
           py::arg("jobs") = 1)
      .def("oracle", &Session::oracle_parses, py::arg("words"), py::arg("tags"),
           py::arg("cap") = 10000,
           "All parses with their probabilities, most probable first")
      .def("tree_prob", &Session::tree_probability, py::arg("tree"));

  m.def("read_treebank", [](const std::string& text) { return read_treebank(text); },
        py::arg("text"));
  m.attr("__version__") = "0.1.0";
}
