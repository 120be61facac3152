#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"
#include "sasp/analysis.hpp"
#include "sasp/parser.hpp"

using namespace sasp;

namespace {

Program parse(const char* text) {
  IdGen gen;
  return parse_program(text, gen);
}

bool has_edge(const CallGraph& g, const char* from, int fa, const char* to, int ta, int w) {
  for (const auto& e : g.edges)
    if (e.from.name == from && e.from.arity == fa && e.to.name == to && e.to.arity == ta &&
        e.weight == w)
      return true;
  return false;
}

}  // namespace

TEST_CASE("call graph edges carry sign weights, arguments ignored") {
  Program p = parse("p :- q, not p.");
  CallGraph g = build_call_graph(p);
  CHECK(g.nodes.size() == 2);
  CHECK(has_edge(g, "p", 0, "q", 0, 0));
  CHECK(has_edge(g, "p", 0, "p", 0, 1));

  Program fact = parse("a.");
  CallGraph gf = build_call_graph(fact);
  CHECK(gf.nodes.size() == 1);
  CHECK(gf.edges.empty());

  Program pa = parse("p(X) :- q(X, Y), not p(Y).");
  CallGraph ga = build_call_graph(pa);
  CHECK(has_edge(ga, "p", 1, "q", 2, 0));
  CHECK(has_edge(ga, "p", 1, "p", 1, 1));
  CHECK(ga.edges.size() == 2);
}

TEST_CASE("classical predicates are distinct call-graph nodes") {
  Program p = parse("-bird(X) :- not bird(X).\nbird(tweety).");
  CallGraph g = build_call_graph(p);
  CHECK(g.nodes.size() == 2);
  RuleClassification rc = detect_olon_rules(g, p);
  CHECK_FALSE(rc.by_clause[0].olon);  // no cycle between -bird and bird
}

TEST_CASE("olon detection") {
  SECTION("direct odd self loop") {
    Program p = parse("p :- not p.");
    RuleClassification rc = detect_olon_rules(build_call_graph(p), p);
    CHECK(rc.by_clause[0].olon);
  }
  SECTION("even loop is not an olon") {
    Program p = parse("q(X, Y) :- not p(X, Y).\np(X, Y) :- not q(X, Y), t(Y, Y).");
    RuleClassification rc = detect_olon_rules(build_call_graph(p), p);
    CHECK_FALSE(rc.by_clause[0].olon);
    CHECK_FALSE(rc.by_clause[1].olon);
    CHECK(rc.by_clause[0].ordinary);
    CHECK(rc.by_clause[1].ordinary);
  }
  SECTION("headless rules are always olon") {
    Program p = parse(":- vertex(U), not reachable(U).\nvertex(0).");
    RuleClassification rc = detect_olon_rules(build_call_graph(p), p);
    CHECK(rc.by_clause[0].olon);
    CHECK_FALSE(rc.by_clause[0].ordinary);
  }
  SECTION("a rule can be both olon and ordinary") {
    Program p = parse("p :- q, not p.\nq.");
    RuleClassification rc = detect_olon_rules(build_call_graph(p), p);
    CHECK(rc.by_clause[0].olon);
    CHECK(rc.by_clause[0].ordinary);
  }
  SECTION("odd loop through three predicates") {
    Program p = parse("a :- not b.\nb :- not c.\nc :- not a.");
    RuleClassification rc = detect_olon_rules(build_call_graph(p), p);
    CHECK(rc.by_clause[0].olon);
    CHECK(rc.by_clause[1].olon);
    CHECK(rc.by_clause[2].olon);
  }
  SECTION("hamiltonian program: chosen/other loop is odd") {
    IdGen gen;
    Program p = parse_program(fixtures::kHamiltonian, gen);
    RuleClassification rc = detect_olon_rules(build_call_graph(p), p);
    int olons = 0;
    for (const auto& r : rc.by_clause) olons += r.olon;
    CHECK(olons == 4);  // two headless rules + other/2 clause + chosen/2 clause
  }
  SECTION("queens program has no olon rules") {
    IdGen gen;
    Program p = parse_program(fixtures::kQueens, gen);
    RuleClassification rc = detect_olon_rules(build_call_graph(p), p);
    for (const auto& r : rc.by_clause) CHECK_FALSE(r.olon);
  }
}

TEST_CASE("classification is variable-blind") {
  Program p1 = parse("p(X) :- q(X, Y), not p(Y).\nq(1, 2).");
  Program p2 = parse("p(a) :- q(b, c), not p(d).\nq(1, 2).");
  RuleClassification r1 = detect_olon_rules(build_call_graph(p1), p1);
  RuleClassification r2 = detect_olon_rules(build_call_graph(p2), p2);
  CHECK(r1.by_clause[0].olon == r2.by_clause[0].olon);
  CHECK(r1.by_clause[0].olon);
}

TEST_CASE("odd-cycle detection agrees with exhaustive walk enumeration") {
  // Random propositional programs over at most 8 predicates; an edge lies on
  // an odd cycle iff some closed walk through it has odd weight. Walks
  // longer than 2|V| revisit a (node, parity) state and can be shortened,
  // so bounded enumeration is exhaustive.
  std::mt19937 rng(2024);
  const char* names[] = {"a", "b", "c", "d", "e", "f", "g", "h"};
  for (int trial = 0; trial < 60; ++trial) {
    int n = 2 + static_cast<int>(rng() % 7);
    int m = 1 + static_cast<int>(rng() % (2 * n));
    std::string text;
    for (int i = 0; i < m; ++i) {
      int from = static_cast<int>(rng() % n);
      int to = static_cast<int>(rng() % n);
      bool neg = rng() % 2;
      text += std::string(names[from]) + " :- " + (neg ? "not " : "") + names[to] + ".\n";
    }
    Program p = parse(text.c_str());
    CallGraph g = build_call_graph(p);
    RuleClassification rc = detect_olon_rules(g, p);

    std::map<PredRef, std::vector<std::pair<PredRef, int>>> adj;
    for (const auto& e : g.edges) adj[e.from].emplace_back(e.to, e.weight);

    for (const auto& e : g.edges) {
      // Brute force: all walks from e.to of length <= 2n.
      bool expect = false;
      std::function<void(const PredRef&, int, int)> dfs = [&](const PredRef& node, int parity,
                                                              int steps) {
        if (expect) return;
        if (node == e.from && (parity + e.weight) % 2 == 1) { expect = true; return; }
        if (steps >= 2 * n) return;
        for (const auto& [next, w] : adj[node]) dfs(next, (parity + w) % 2, steps + 1);
      };
      dfs(e.to, 0, 0);
      INFO("edge " << e.from.name << "->" << e.to.name << " w=" << e.weight);
      CHECK(rc.by_clause[e.clause_id].olon == expect);
    }
  }
}

TEST_CASE("legality diagnostics") {
  SECTION("unbounded arithmetic recursion warns") {
    Program p = parse("s(X) :- X2 is X + 1, s(X2).");
    auto diags = check_legality(p);
    bool found = false;
    for (const auto& d : diags)
      if (d.message.find("nontermination") != std::string::npos) found = true;
    CHECK(found);
  }
  SECTION("head occurrence counts as potentially ground") {
    Program p = parse("abs(X, X) :- X >= 0.");
    for (const auto& d : check_legality(p))
      CHECK(d.message.find("arithmetic") == std::string::npos);
  }
  SECTION("free arithmetic operand warns") {
    Program p = parse("p :- X > 1.");
    auto diags = check_legality(p);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].message.find("arithmetic") != std::string::npos);
  }
  SECTION("repeated head variables note the dual error class") {
    Program p = parse("t(A, A).");
    auto diags = check_legality(p);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].message.find("illegal-disunification") != std::string::npos);
  }
  SECTION("empty program is clean") {
    Program p = parse("");
    CHECK(check_legality(p).empty());
  }
  SECTION("queens has no nontermination warnings") {
    IdGen gen;
    Program p = parse_program(fixtures::kQueens, gen);
    for (const auto& d : check_legality(p))
      CHECK(d.message.find("nontermination") == std::string::npos);
  }
}
