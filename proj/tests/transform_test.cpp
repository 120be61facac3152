#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "fixtures.hpp"
#include "sasp/analysis.hpp"
#include "sasp/parser.hpp"
#include "sasp/print.hpp"
#include "sasp/transform.hpp"
#include "test_util.hpp"

using namespace sasp;
using testutil::AlphaEq;

namespace {

Program parse(const char* text, IdGen& gen) { return parse_program(text, gen); }

// Extracts the dual cluster for `not name/arity`: the clauses headed by the
// negated literal first, then the defining clauses of every generated helper
// they reference, in first-reference order.
Program dual_cluster(const Program& duals, const std::string& name, int arity,
                     bool classical = false) {
  Program out;
  std::vector<std::string> helper_queue;
  std::set<std::string> seen;
  auto scan_for_helpers = [&](const Clause& c) {
    for (const Goal& g : c.body)
      scan_goal_literals(g, [&](const Literal& l) {
        if (is_internal_predicate(l.predicate) && seen.insert(l.predicate).second)
          helper_queue.push_back(l.predicate);
      });
  };
  for (const Clause& c : duals.clauses)
    if (c.head && c.head->naf && c.head->classical == classical && c.head->predicate == name &&
        c.head->arity() == arity) {
      out.add(c);
      scan_for_helpers(c);
    }
  for (size_t i = 0; i < helper_queue.size(); ++i)
    for (const Clause& c : duals.clauses)
      if (c.head && !c.head->naf && c.head->predicate == helper_queue[i]) {
        out.add(c);
        scan_for_helpers(c);
      }
  return out;
}

// Parses the expected listing (generated syntax) and compares structurally,
// allowing helper predicates and variables to be renamed.
void expect_cluster(const Program& got, const char* expected_text) {
  IdGen gen;
  ParseOptions o;
  o.generated = true;
  Program expected = parse_program(expected_text, gen, o);
  INFO("got:\n" << to_string(got) << "\nexpected:\n" << to_string(expected));
  CHECK(AlphaEq().programs(got, expected));
}

}  // namespace

TEST_CASE("head abstraction") {
  IdGen gen;
  SECTION("repeated variable") {
    Program p = parse("t(A, A).", gen);
    Clause c = abstract_head(p.clauses[0], gen);
    REQUIRE(c.body.size() == 1);
    CHECK(c.head->args[0] != c.head->args[1]);
    CHECK(c.body[0].op == BuiltinOp::Unify);
    // Goal unifies the original variable with the new one: A = B.
    CHECK(c.body[0].lhs == c.head->args[0]);
    CHECK(c.body[0].rhs == c.head->args[1]);
  }
  SECTION("already distinct variables: identity") {
    Program p = parse("p(X) :- q(X).", gen);
    Clause c = abstract_head(p.clauses[0], gen);
    CHECK(c.body.size() == 1);
    CHECK(c.head->args[0] == p.clauses[0].head->args[0]);
  }
  SECTION("structured argument") {
    Program p = parse("p([X|T]) :- q(X), p(T).", gen);
    Clause c = abstract_head(p.clauses[0], gen);
    REQUIRE(c.body.size() == 3);
    CHECK(c.head->args[0].is_var());
    CHECK(c.body[0].op == BuiltinOp::Unify);
    CHECK(c.body[0].lhs == c.head->args[0]);  // Z = [X|T]
    CHECK(c.body[0].rhs.name() == ".");
  }
  SECTION("semantics-preserving for ground heads") {
    Program p = parse("edge(0, 1).", gen);
    Clause c = abstract_head(p.clauses[0], gen);
    REQUIRE(c.body.size() == 2);
    CHECK(c.head->args[0].is_var());
    CHECK(c.body[0].rhs == Term::number(Rational(0)));
    CHECK(c.body[1].rhs == Term::number(Rational(1)));
  }
}

TEST_CASE("dual rules match the worked examples") {
  SECTION("two propositional clauses") {
    IdGen gen;
    Program ab = abstract_heads(parse("p :- a, not b.\np :- r.", gen), gen);
    Program duals = generate_duals(ab, gen);
    // Goal-prefix form; `$np1 :- a, b.` is `np1 :- b.` by absorption.
    expect_cluster(dual_cluster(duals, "p", 0),
                   "not p :- $np1, $np2.\n"
                   "$np1 :- not a.\n"
                   "$np1 :- a, b.\n"
                   "$np2 :- not r.");
  }
  SECTION("repeated head variable") {
    IdGen gen;
    Program ab = abstract_heads(parse("t(A, A).", gen), gen);
    Program duals = generate_duals(ab, gen);
    expect_cluster(dual_cluster(duals, "t", 2), "not t(A, B) :- A \\= B.");
  }
  SECTION("goal prefixes are repeated") {
    IdGen gen;
    Program ab = abstract_heads(parse("p(X, Y) :- not q(X), t(Y, Y).", gen), gen);
    Program duals = generate_duals(ab, gen);
    expect_cluster(dual_cluster(duals, "p", 2),
                   "not p(X, Y) :- q(X).\n"
                   "not p(X, Y) :- not q(X), not t(Y, Y).");
  }
  SECTION("body variables are universally quantified") {
    IdGen gen;
    Program ab = abstract_heads(parse("q(X) :- not p(X, Y).", gen), gen);
    Program duals = generate_duals(ab, gen);
    expect_cluster(dual_cluster(duals, "q", 1),
                   "not q(X) :- forall(Y, $nq1(X, Y)).\n"
                   "$nq1(X, Y) :- p(X, Y).");
  }
  SECTION("head structure abstraction feeds the forall") {
    IdGen gen;
    Program ab = abstract_heads(parse("p([X|T]) :- q(X), p(T).", gen), gen);
    Program duals = generate_duals(ab, gen);
    expect_cluster(dual_cluster(duals, "p", 1),
                   "not p(Z) :- forall(X, forall(T, $np1(Z, X, T))).\n"
                   "$np1(Z, X, T) :- Z \\= [X|T].\n"
                   "$np1(Z, X, T) :- Z = [X|T], not q(X).\n"
                   "$np1(Z, X, T) :- Z = [X|T], q(X), not p(T).");
  }
  SECTION("predicate with no clauses gets the unconditional dual") {
    IdGen gen;
    Program ab = abstract_heads(parse("p :- not d.", gen), gen);
    Program duals = generate_duals(ab, gen);
    expect_cluster(dual_cluster(duals, "d", 0), "not d.");
  }
  SECTION("classical predicates are dualized like ordinary ones") {
    IdGen gen;
    Program ab = abstract_heads(parse("-flies(X) :- ab(X).", gen), gen);
    Program duals = generate_duals(ab, gen);
    Program cluster = dual_cluster(duals, "flies", 1, true);
    REQUIRE(cluster.clauses.size() == 1);
    CHECK(cluster.clauses[0].head->naf);
    CHECK(cluster.clauses[0].head->classical);
  }
}

TEST_CASE("negate_goal maps builtins to complements") {
  IdGen gen;
  Program p = parse("p :- X = 1, X \\= 2, X < 3, X > 4, X >= 5, X =< 6, X is 7.", gen);
  const auto& body = p.clauses[0].body;
  CHECK(negate_goal(body[0]).op == BuiltinOp::Disunify);
  CHECK(negate_goal(body[1]).op == BuiltinOp::Unify);
  CHECK(negate_goal(body[2]).op == BuiltinOp::Geq);
  CHECK(negate_goal(body[3]).op == BuiltinOp::Leq);
  CHECK(negate_goal(body[4]).op == BuiltinOp::Less);
  CHECK(negate_goal(body[5]).op == BuiltinOp::Greater);
  CHECK(negate_goal(body[6]).op == BuiltinOp::NotIs);
  CHECK(negate_goal(negate_goal(body[6])).op == BuiltinOp::Is);
}

namespace {

NmrCheck make_nmr(const char* text, IdGen& gen, Program* abstracted_out = nullptr) {
  Program src = parse(text, gen);
  RuleClassification rc = detect_olon_rules(build_call_graph(src), src);
  Program ab = abstract_heads(src, gen);
  if (abstracted_out) *abstracted_out = ab;
  return generate_nmr_check(ab, rc, gen);
}

}  // namespace

TEST_CASE("nmr check construction") {
  SECTION("direct olon with head variable") {
    IdGen gen;
    NmrCheck nmr = make_nmr("p(X) :- q(X), not p(X).", gen);
    expect_cluster(nmr.checks,
                   "$chk(X) :- not q(X).\n"
                   "$chk(X) :- q(X), p(X).");
    REQUIRE(nmr.nmr_clause.body.size() == 1);
    const Goal& g = nmr.nmr_clause.body[0];
    REQUIRE(g.kind == Goal::Kind::Forall);
    CHECK(g.quant_body->call.predicate.starts_with("$chk"));
  }
  SECTION("conditional olon gets the two-level sub-check") {
    IdGen gen;
    NmrCheck nmr = make_nmr("p(X) :- q(X, Y), not p(Y).", gen);
    expect_cluster(nmr.checks,
                   "$chk2(X, Y) :- not q(X, Y).\n"
                   "$chk2(X, Y) :- q(X, Y), p(Y).\n"
                   "$chk2(X, Y) :- q(X, Y), not p(Y), p(X).\n"
                   "$chk(X) :- forall(Y, $chk2(X, Y)).");
    REQUIRE(nmr.nmr_clause.body.size() == 1);
    CHECK(nmr.nmr_clause.body[0].kind == Goal::Kind::Forall);
  }
  SECTION("propositional olon rules, one sub-check per clause") {
    IdGen gen;
    NmrCheck nmr = make_nmr(
        "p :- b, not p.\n"
        "p :- not q, not p.\n"
        "p :- q, r, not p.", gen);
    // Prefix-form duals; equivalent to the compact listings by absorption.
    expect_cluster(nmr.checks,
                   "$chk1 :- not b.\n"
                   "$chk1 :- b, p.\n"
                   "$chk2 :- q.\n"
                   "$chk2 :- not q, p.\n"
                   "$chk3 :- not q.\n"
                   "$chk3 :- q, not r.\n"
                   "$chk3 :- q, r, p.");
    CHECK(nmr.nmr_clause.body.size() == 3);
  }
  SECTION("headless rule wraps body variables during sub-check creation") {
    IdGen gen;
    NmrCheck nmr = make_nmr(":- vertex(U), not reachable(U).", gen);
    expect_cluster(nmr.checks,
                   "$chk2(U) :- not vertex(U).\n"
                   "$chk2(U) :- vertex(U), reachable(U).\n"
                   "$chk :- forall(U, $chk2(U)).");
    REQUIRE(nmr.nmr_clause.body.size() == 1);
    CHECK(nmr.nmr_clause.body[0].kind == Goal::Kind::Call);  // no free variables left
  }
  SECTION("propositional constraint") {
    IdGen gen;
    NmrCheck nmr = make_nmr(":- not c.", gen);
    expect_cluster(nmr.checks, "$chk :- c.");
  }
  SECTION("no olon rules: trivially true check") {
    IdGen gen;
    NmrCheck nmr = make_nmr("p :- q.\nq.", gen);
    CHECK(nmr.checks.clauses.empty());
    CHECK(nmr.nmr_clause.body.empty());
  }
  SECTION("negation of the head is not appended twice") {
    IdGen gen;
    Program ab;
    NmrCheck nmr = make_nmr("p(X) :- q(X), not p(X).", gen, &ab);
    // Two prefix clauses only: the body already ends with `not p(X)`.
    CHECK(nmr.checks.clauses.size() == 2);
  }
}

TEST_CASE("transformed program indexing and coverage") {
  IdGen gen;
  Program src = parse(fixtures::kTweety, gen);
  TransformedProgram tp = transform(src, gen);

  SECTION("every known predicate has a rule set for its negation") {
    for (const auto& [pred, clauses] : src.index) {
      PredRef n = pred;
      n.naf = true;
      INFO(pred.name);
      CHECK(tp.rules(n) != nullptr);
      (void)clauses;
    }
    // Also predicates appearing only in bodies.
    PredRef not_ab{true, false, "ab", 1};
    CHECK(tp.rules(not_ab) != nullptr);
  }

  SECTION("unknown predicates are distinguishable from empty rule sets") {
    CHECK(tp.rules(PredRef{false, false, "nowhere", 3}) == nullptr);
  }

  SECTION("generated helpers have one contiguous definition site") {
    std::map<std::string, std::vector<int>> sites;
    const Program& d = tp.duals();
    for (int i = 0; i < static_cast<int>(d.clauses.size()); ++i)
      if (is_internal_predicate(d.clauses[i].head->predicate))
        sites[d.clauses[i].head->predicate].push_back(i);
    for (const auto& [name, idxs] : sites) {
      INFO(name);
      CHECK(idxs.back() - idxs.front() + 1 == static_cast<int>(idxs.size()));
    }
  }

  SECTION("transformed call graph contains the original as a subgraph") {
    CallGraph orig = build_call_graph(src);
    Program all;
    for (const Program* p : {&tp.originals(), &tp.duals(), &tp.checks()})
      for (const Clause& c : p->clauses) all.add(c);
    CallGraph big = build_call_graph(all);
    auto key = [](const CallGraph::Edge& e) {
      return e.from.name + "/" + std::to_string(e.from.arity) + (e.from.classical ? "c" : "") +
             "->" + e.to.name + "/" + std::to_string(e.to.arity) + (e.to.classical ? "c" : "") +
             ":" + std::to_string(e.weight);
    };
    std::set<std::string> big_edges;
    for (const auto& e : big.edges) big_edges.insert(key(e));
    for (const auto& e : orig.edges) {
      INFO(key(e));
      CHECK(big_edges.count(key(e)));
    }
  }
}
