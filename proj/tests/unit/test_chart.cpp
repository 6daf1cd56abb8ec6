#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace picky;
using namespace picky::test;

namespace {

Edge make_edge(int rule, int lo, int hi, int start, int end, std::vector<int> children,
               double inner_log, int inner_count, int lc_tag) {
  Edge e;
  e.rule = rule;
  e.lo = lo;
  e.hi = hi;
  e.start = start;
  e.end = end;
  e.children = std::move(children);
  e.inner = Score{inner_log, inner_count};
  e.lc_tag = lc_tag;
  return e;
}

// a complete VP -> v constituent over [pos,pos+1)
int add_vp(Chart& chart, const Grammar& g, int pos) {
  int leaf = chart.add_leaf(pos, g.symbol_id("v"));
  int id = -1;
  chart.add_edge(make_edge(rule_id(g, "VP -> v"), 1, 1, pos, pos + 1, {leaf}, 0.0, 0,
                           g.symbol_id("v")),
                 &id);
  return id;
}

}  // namespace

TEST_CASE("add_edge: Added / Improved / Duplicate transitions") {
  const Grammar& g = c0().gf.grammar;
  Chart chart(g, 2);
  int det = chart.add_leaf(0, g.symbol_id("det"));
  int n = chart.add_leaf(1, g.symbol_id("n"));
  int np = rule_id(g, "NP -> det n");

  // det-side derivation completes the NP
  int first = -1;
  CHECK(chart.add_edge(
            make_edge(np, 1, 2, 0, 2, {det, n}, std::log(0.5), 1, g.symbol_id("det")),
            &first) == AddResult::Added);
  CHECK(chart.edges_created() == 1);
  CHECK(chart.completions() == 1);

  // n-side derivation of the same key with equal score: rejected
  int dup = -1;
  CHECK(chart.add_edge(
            make_edge(np, 1, 2, 0, 2, {det, n}, std::log(0.5), 1, g.symbol_id("det")),
            &dup) == AddResult::Duplicate);
  CHECK(dup == first);
  CHECK(chart.edges_created() == 1);
  CHECK(chart.completions() == 1);

  // strictly better score replaces the stored edge
  int better = -1;
  CHECK(chart.add_edge(
            make_edge(np, 1, 2, 0, 2, {det, n}, std::log(0.9), 1, g.symbol_id("det")),
            &better) == AddResult::Improved);
  CHECK(better != first);
  CHECK_FALSE(chart.is_live(first));
  CHECK(chart.is_live(better));
  CHECK(chart.edges_created() == 1);  // Improved does not create
  CHECK(chart.live_id(EdgeKey{np, 1, 2, 0, 2}) == better);
  chart.validate();
}

TEST_CASE("add_edge rejects invariant violations") {
  const Grammar& g = c0().gf.grammar;
  Chart chart(g, 2);
  int det = chart.add_leaf(0, g.symbol_id("det"));
  int np = rule_id(g, "NP -> det n");
  CHECK_THROWS_AS(chart.add_edge(make_edge(np, 2, 1, 0, 1, {}, 0, 0, 0)), Error);
  CHECK_THROWS_AS(chart.add_edge(make_edge(np, 1, 3, 0, 1, {det, det, det}, 0, 0, 0)),
                  Error);
  CHECK_THROWS_AS(chart.add_edge(make_edge(np, 1, 1, 1, 1, {det}, 0, 0, 0)), Error);
}

TEST_CASE("adjacency queries answer by symbol and position") {
  const Grammar& g = c0().gf.grammar;
  Chart chart(g, 3);
  CHECK(chart.completes_starting(g.symbol_id("NP"), 0).empty());

  int det = chart.add_leaf(0, g.symbol_id("det"));
  int n = chart.add_leaf(1, g.symbol_id("n"));
  int np_id = -1;
  chart.add_edge(make_edge(rule_id(g, "NP -> det n"), 1, 2, 0, 2, {det, n},
                           std::log(0.5), 1, g.symbol_id("det")),
                 &np_id);
  CHECK(chart.completes_starting(g.symbol_id("NP"), 0) == std::vector<int>{np_id});
  CHECK(chart.completes_ending(g.symbol_id("NP"), 2) == std::vector<int>{np_id});
  CHECK(chart.completes_starting(g.symbol_id("NP"), 1).empty());

  // incomplete edge needing VP to its right
  int s_edge = -1;
  chart.add_edge(make_edge(rule_id(g, "S -> NP VP"), 1, 1, 0, 2, {np_id}, std::log(0.5),
                           2, g.symbol_id("det")),
                 &s_edge);
  CHECK(chart.needing_right(g.symbol_id("VP"), 2) == std::vector<int>{s_edge});
  CHECK_FALSE(chart.saw_full_span());
  chart.validate();
}

TEST_CASE("best_complete: max raw score, then longer span, then leftmost") {
  const Grammar& g = c0().gf.grammar;
  int s_rule = rule_id(g, "S -> NP VP");
  int s_sym = g.symbol_id("S");

  Chart chart(g, 8);
  int a = -1, b = -1;
  chart.add_edge(make_edge(s_rule, 1, 2, 0, 6,
                           {add_vp(chart, g, 0), add_vp(chart, g, 1)}, std::log(0.4), 2,
                           g.symbol_id("v")),
                 &a);
  // spans must tile; reuse constituents over [2,3),[3,4) under a wider claim
  chart.add_edge(make_edge(s_rule, 1, 2, 2, 4,
                           {add_vp(chart, g, 2), add_vp(chart, g, 3)}, std::log(0.3), 2,
                           g.symbol_id("v")),
                 &b);
  CHECK(chart.best_complete(s_sym) == a);  // 0.4 beats 0.3 whatever the span

  SUBCASE("equal scores prefer the longer span") {
    Chart tie(g, 8);
    int five = -1, seven = -1;
    tie.add_edge(make_edge(s_rule, 1, 2, 0, 5, {add_vp(tie, g, 0), add_vp(tie, g, 1)},
                           std::log(0.4), 2, g.symbol_id("v")),
                 &five);
    tie.add_edge(make_edge(s_rule, 1, 2, 1, 8, {add_vp(tie, g, 1), add_vp(tie, g, 2)},
                           std::log(0.4), 2, g.symbol_id("v")),
                 &seven);
    CHECK(tie.best_complete(s_sym) == seven);
  }
  SUBCASE("no candidates") {
    Chart empty(g, 3);
    CHECK(empty.best_complete(s_sym) == -1);
  }
}

TEST_CASE("full-span bookkeeping") {
  const Grammar& g = c0().gf.grammar;
  Chart chart(g, 2);
  int s_rule = rule_id(g, "S -> NP VP");
  int id = -1;
  chart.add_edge(make_edge(s_rule, 1, 2, 0, 2, {add_vp(chart, g, 0), add_vp(chart, g, 1)},
                           std::log(0.5), 2, g.symbol_id("v")),
                 &id);
  CHECK(chart.saw_full_span());
  CHECK(chart.best_full_span(g.symbol_id("S")) == id);
}

TEST_CASE("extract_tree reads constituents back as trees") {
  const Grammar& g = c0().gf.grammar;
  Chart chart(g, 1);
  int leaf = chart.add_leaf(0, g.symbol_id("v"));
  TreeNode ln = chart.extract_tree(leaf);
  CHECK(ln.label == "v");
  CHECK(ln.is_leaf());

  int vp = add_vp(chart, g, 0);
  TreeNode tn = chart.extract_tree(vp);
  CHECK(tn.label == "VP");
  REQUIRE(tn.children.size() == 1);
  CHECK(tn.children[0].label == "v");
}

TEST_CASE("chart dump lists live edges in key order") {
  const Grammar& g = c0().gf.grammar;
  Chart chart(g, 2);
  int det = chart.add_leaf(0, g.symbol_id("det"));
  int n = chart.add_leaf(1, g.symbol_id("n"));
  Edge e = make_edge(rule_id(g, "NP -> det n"), 1, 2, 0, 2, {det, n}, std::log(0.25), 1,
                     g.symbol_id("det"));
  e.top_log = std::log(0.5);
  e.origin = Phase::II;
  chart.add_edge(std::move(e));
  CHECK(chart.dump() == "[0,2) NP -> det n 1..2 score=0.353553 phase=II\n");
}
