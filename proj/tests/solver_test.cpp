#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "sasp/parser.hpp"
#include "sasp/print.hpp"
#include "sasp/solver.hpp"
#include "sasp/transform.hpp"

using namespace sasp;

namespace {

struct Session {
  IdGen gen;
  Program src;
  std::unique_ptr<TransformedProgram> tp;

  explicit Session(const std::string& program) {
    src = parse_program(program, gen);
    tp = std::make_unique<TransformedProgram>(transform(src, gen));
  }

  std::vector<PartialModel> all(const std::string& query, int max_models = -1,
                                SolverConfig cfg = {}) {
    ParsedQuery q = parse_query(query, gen);
    Solver solver(*tp, gen, cfg);
    std::vector<PartialModel> out;
    solver.run(q.goals, q.vars, [&](const PartialModel& pm) {
      out.push_back(pm);
      return max_models < 0 || static_cast<int>(out.size()) < max_models;
    });
    return out;
  }
};

// Visible (non-internal) entries as printed strings, unsorted.
std::vector<std::string> entries(const PartialModel& pm) {
  std::vector<std::string> out;
  for (const Literal& l : pm.entries)
    if (!is_internal_predicate(l.predicate)) out.push_back(to_string(l));
  return out;
}

bool has_entry(const PartialModel& pm, const std::string& s) {
  auto es = entries(pm);
  return std::find(es.begin(), es.end(), s) != es.end();
}

Term binding(const PartialModel& pm, const std::string& name) {
  for (const auto& [n, t] : pm.bindings)
    if (n == name) return t;
  FAIL("no binding for " + name);
  return {};
}

}  // namespace

TEST_CASE("facts and definite rules") {
  Session s("p :- q. q.");
  auto models = s.all("?- p.");
  REQUIRE(models.size() == 1);
  CHECK(has_entry(models[0], "p"));
  CHECK(has_entry(models[0], "q"));
}

TEST_CASE("tweety: classical negation answers") {
  Session s(fixtures::kTweety);
  auto models = s.all("?- -flies(X).");
  std::set<std::string> ground_answers;
  int constrained = 0;
  for (const auto& pm : models) {
    Term x = binding(pm, "X");
    if (x.is_var()) {
      ++constrained;
      // The open answer must exclude the known birds.
      auto it = pm.constraints.find(x.var_id());
      REQUIRE(it != pm.constraints.end());
      std::set<std::string> prohibited;
      for (const Term& t : it->second) prohibited.insert(to_string(t));
      CHECK(prohibited.count("tweety"));
      CHECK(prohibited.count("sam"));
      CHECK(prohibited.count("john"));
    } else {
      ground_answers.insert(to_string(x));
    }
  }
  CHECK(ground_answers == std::set<std::string>{"sam", "john"});
}

TEST_CASE("empty-variable semantics: constrained success") {
  Session s("d(1). p(X) :- not d(X).");
  auto models = s.all("?- p(X).");
  REQUIRE(models.size() == 1);
  Term x = binding(models[0], "X");
  REQUIRE(x.is_var());
  auto it = models[0].constraints.find(x.var_id());
  REQUIRE(it != models[0].constraints.end());
  REQUIRE(it->second.size() == 1);
  CHECK(to_string(it->second[0]) == "1");
  CHECK(has_entry(models[0], to_string(Literal{false, false, "p", {x}})));
  CHECK(has_entry(models[0], to_string(Literal{true, false, "d", {x}})));
}

TEST_CASE("unsatisfiable nmr check blocks every query") {
  Session s("a. :- not c.");
  CHECK(s.all("?- a.").empty());
}

TEST_CASE("coinductive failure as a filter: pi example") {
  Session s("pi(X) :- X = 3.14.");
  auto models = s.all("?- pi(Y), not pi(X).");
  REQUIRE(models.size() == 1);
  CHECK(to_string(binding(models[0], "Y")) == "3.14");
  Term x = binding(models[0], "X");
  REQUIRE(x.is_var());
  auto it = models[0].constraints.find(x.var_id());
  REQUIRE(it != models[0].constraints.end());
  CHECK(to_string(it->second[0]) == "3.14");
}

TEST_CASE("filter alternatives follow prohibited-list order") {
  Session s("q(X) :- X \\= 2, X \\= 3.");
  auto models = s.all("?- q(X), not q(Y).");
  REQUIRE(models.size() == 2);
  CHECK(to_string(binding(models[0], "Y")) == "2");
  CHECK(to_string(binding(models[1], "Y")) == "3");
}

TEST_CASE("filter considers each argument separately, first to last") {
  // With the CHS holding q(W,X) {W,X != 2,3} and q(Y,3) {Y != 2,3}, the
  // coinductive failure check for not q(A,B) succeeds exactly three times:
  // A=2, A=3, then B=2.
  IdGen gen;
  Program src = parse_program(
      "q(W, X) :- W \\= 2, W \\= 3, X \\= 2, X \\= 3.\n"
      "q(Y, 3) :- Y \\= 2, Y \\= 3.",
      gen);
  TransformedProgram tp = transform(src, gen);
  ParsedQuery q = parse_query("?- q(W, X), q(Y, 3).", gen);
  Term a = Term::var(gen.fresh(), "A");
  Term b = Term::var(gen.fresh(), "B");
  SolverConfig cfg;
  cfg.append_nmr = false;
  Solver solver(tp, gen, cfg);

  std::vector<std::string> alts;
  solver.run(q.goals, q.vars, [&](const PartialModel&) {
    Literal goal{true, false, "q", {a, b}};
    auto outcome = solver.check_chs_for_test(goal, [&] {
      Term ad = solver.store().deref(a);
      Term bd = solver.store().deref(b);
      if (!ad.is_var())
        alts.push_back("A=" + to_string(ad));
      else if (!bd.is_var())
        alts.push_back("B=" + to_string(bd));
      else
        alts.push_back("?");
      return false;  // enumerate every alternative
    });
    CHECK(outcome == Solver::ChsCheck::Filtered);
    return false;  // only the first derivation of the q goals matters here
  });
  CHECK(alts == std::vector<std::string>{"A=2", "A=3", "B=2"});
}

TEST_CASE("exact matches gate positive loops: pi-typed recursion") {
  Session s("r(V) :- r(V2). r(3.14).");
  auto models = s.all("?- r(1).");
  REQUIRE(models.size() == 1);
  CHECK(has_entry(models[0], "r(1)"));
  CHECK(has_entry(models[0], "r(3.14)"));
}

TEST_CASE("occurs check keeps successor arithmetic inductive") {
  Session s("n(0). n(s(X)) :- n(X).");
  auto models = s.all("?- n(s(s(X))).", 2);
  REQUIRE(models.size() == 2);
  CHECK(to_string(binding(models[0], "X")) == "0");
  CHECK(has_entry(models[0], "n(0)"));
  CHECK(has_entry(models[0], "n(s(0))"));
  CHECK(has_entry(models[0], "n(s(s(0)))"));
  CHECK(entries(models[0]).size() == 3);
  CHECK(to_string(binding(models[1], "X")) == "s(0)");
}

TEST_CASE("bare positive loop fails") {
  Session s("p :- p.");
  CHECK(s.all("?- p.").empty());
}

TEST_CASE("even loop: coinductive success with loop variables") {
  Session s(
      "p(X, Y) :- not q(X, Y), t(Y, Y).\n"
      "q(X, Y) :- not p(X, Y).\n"
      "t(0, 0).");
  auto models = s.all("?- q(X, Y).");
  REQUIRE(models.size() >= 1);
  const PartialModel& pm = models[0];
  Term x = binding(pm, "X");
  Term y = binding(pm, "Y");
  REQUIRE(x.is_var());
  REQUIRE(y.is_var());
  CHECK(pm.loopvars.count(x.var_id()));
  CHECK(pm.loopvars.count(y.var_id()));
  CHECK(has_entry(pm, to_string(Literal{false, false, "q", {x, y}})));
  CHECK(has_entry(pm, to_string(Literal{true, false, "p", {x, y}})));
}

TEST_CASE("forall: the worked example answers not p") {
  Session s(
      "p :- not q(X).\n"
      "q(Y) :- Y = a.\n"
      "q(Y) :- Y \\= a.");
  auto models = s.all("?- not p.");
  REQUIRE(!models.empty());
  CHECK(has_entry(models[0], "not p"));
  // And the positive query succeeds in no model.
  CHECK(s.all("?- p.").empty());
}

TEST_CASE("forall fails when the goal only holds for one value") {
  // The dual of `w :- not p(X).` calls forall(X, p(X)), which must fail when
  // the only rule is p(1): the variable's domain is never just {1}.
  Session s("w :- not p(X). p(1).");
  CHECK(s.all("?- not w.").empty());
  CHECK(s.all("?- w.").size() == 1);

  // Direct probe of the same forall.
  IdGen gen;
  Program src = parse_program("p(1).", gen);
  TransformedProgram tp = transform(src, gen);
  SolverConfig cfg;
  cfg.append_nmr = false;
  Term x = Term::var(gen.fresh(), "X");
  Solver solver(tp, gen, cfg);
  std::vector<Goal> goals{
      Goal::forall(x, Goal::literal(Literal{false, false, "p", {x}}))};
  bool ok = false;
  solver.run(goals, {}, [&](const PartialModel&) {
    ok = true;
    return false;
  });
  CHECK_FALSE(ok);
}

TEST_CASE("forall over a goal that ignores the variable") {
  Session s("g. h(X) :- g.");
  auto models = s.all("?- not h(X).");
  CHECK(models.empty());  // h holds for every X via g
  Session s2("g.");
  // not h over an undefined predicate succeeds vacuously.
  CHECK(!s2.all("?- not h(X).").empty());
}

TEST_CASE("arithmetic evaluation") {
  Session s(
      "f(X, Y) :- Y is X * -1.\n"
      "cmp(X) :- X > 1, X =< 3, X >= 2, 0 < X.\n"
      "d(X) :- X1 is 5 - 1, X = X1.");
  auto m1 = s.all("?- f(-3, Y).");
  REQUIRE(m1.size() == 1);
  CHECK(to_string(binding(m1[0], "Y")) == "3");

  auto m2 = s.all("?- d(X).");
  REQUIRE(m2.size() == 1);
  CHECK(to_string(binding(m2[0], "X")) == "4");

  CHECK(s.all("?- cmp(2).").size() == 1);
  CHECK(s.all("?- cmp(4).").empty());

  auto m3 = s.all("?- X is 7 / 2.");
  REQUIRE(m3.size() == 1);
  CHECK(to_string(binding(m3[0], "X")) == "3.5");
}

TEST_CASE("fatal errors") {
  SECTION("illegal disunification from dual calls") {
    Session s("t(A, A).");
    CHECK_THROWS_AS(s.all("?- not t(A, 2), not t(B, 1), not t(A, B)."),
                    IllegalDisunification);
  }
  SECTION("non-ground arithmetic") {
    Session s("inc(X, Y) :- Y is X + 1.");
    CHECK_THROWS_AS(s.all("?- inc(A, B)."), NonGroundArithmetic);
  }
  SECTION("non-numeric arithmetic") {
    Session s("inc(X, Y) :- Y is X + 1.");
    CHECK_THROWS_AS(s.all("?- inc(a, B)."), NonGroundArithmetic);
  }
  SECTION("division by zero") {
    Session s("half(X, Y) :- Y is X / 0.");
    CHECK_THROWS_AS(s.all("?- half(4, Y)."), DivisionByZero);
  }
  SECTION("depth limit") {
    Session s("s(X) :- X2 is X + 1, s(X2).");
    SolverConfig cfg;
    cfg.depth_limit = 64;
    CHECK_THROWS_AS(s.all("?- s(1).", -1, cfg), DepthLimitExceeded);
  }
}

TEST_CASE("chs insertion rejects inconsistent literals") {
  IdGen gen;
  Program src = parse_program("p.", gen);
  TransformedProgram tp = transform(src, gen);
  Solver solver(tp, gen);
  Literal p{false, false, "p", {}};
  Literal notp{true, false, "p", {}};
  Literal negp{false, true, "p", {}};
  CHECK(solver.chs_insert_for_test(p));
  CHECK(solver.chs_insert_for_test(p));  // duplicate is a no-op
  CHECK(solver.chs().size() == 1);
  CHECK_FALSE(solver.chs_insert_for_test(notp));
  CHECK_FALSE(solver.chs_insert_for_test(negp));  // classical complement
}

TEST_CASE("deterministic paths create no choice points") {
  IdGen gen;
  Program src = parse_program("p :- q. q.", gen);
  TransformedProgram tp = transform(src, gen);
  ParsedQuery q = parse_query("?- p, p.", gen);
  Solver solver(tp, gen);
  int models = 0;
  solver.run(q.goals, q.vars, [&](const PartialModel&) {
    ++models;
    return false;
  });
  CHECK(models == 1);
  CHECK(solver.choicepoint_probes == 0);
}

TEST_CASE("dual completeness on a loop-free program") {
  // For every ground instance over the constants (plus a fresh one), exactly
  // one of q(g) and not q(g) succeeds.
  Session s("p(a). p(b). q(X) :- p(X). s(a) :- p(b). empty(z) :- p(z).");
  const char* universe[] = {"a", "b", "c"};
  const char* preds[] = {"p", "q", "s", "empty"};
  for (const char* pred : preds) {
    for (const char* u : universe) {
      std::string pos = std::string("?- ") + pred + "(" + u + ").";
      std::string neg = std::string("?- not ") + pred + "(" + u + ").";
      bool pos_ok = !s.all(pos).empty();
      bool neg_ok = !s.all(neg).empty();
      INFO(pred << "(" << u << ")");
      CHECK(pos_ok != neg_ok);
    }
  }
}

TEST_CASE("conditional olon sub-checks always succeed off the loop") {
  // For X != Y the sub-check must hold under every fact assignment that
  // leaves the program consistent. Self-loop facts q(a,a)/q(b,b) can make
  // p(v) depend oddly on itself with no stable model at all, in which case
  // no derivation can succeed; those are exercised separately below.
  const char* facts_q[] = {"q(a,b).", "q(b,a)."};
  const char* facts_p[] = {"px(a).", "px(b)."};
  for (int qm = 0; qm < 4; ++qm) {
    for (int pm = 0; pm < 4; ++pm) {
      std::string text = "p(X) :- q(X, Y), not p(Y).\np(X) :- px(X).\n";
      for (int i = 0; i < 2; ++i)
        if (qm & (1 << i)) text += std::string(facts_q[i]) + "\n";
      for (int i = 0; i < 2; ++i)
        if (pm & (1 << i)) text += std::string(facts_p[i]) + "\n";

      IdGen gen;
      Program src = parse_program(text, gen);
      TransformedProgram tp = transform(src, gen);
      // Find the inner sub-check (the one carrying both X and Y).
      std::string inner;
      for (const Clause& c : tp.checks().clauses)
        if (c.head->arity() == 2 && c.head->predicate.starts_with("$chk")) {
          inner = c.head->predicate;
          break;
        }
      REQUIRE(!inner.empty());

      SolverConfig cfg;
      cfg.append_nmr = false;
      Solver solver(tp, gen, cfg);
      std::vector<Goal> goals{Goal::literal(
          Literal{false, false, inner, {Term::constant("a"), Term::constant("b")}})};
      bool ok = false;
      solver.run(goals, {}, [&](const PartialModel&) {
        ok = true;
        return false;
      });
      INFO("facts mask q=" << qm << " p=" << pm);
      CHECK(ok);
    }
  }

  // The on-loop instantiation without an alternative proof of p(b) has no
  // stable model; every query fails under the NMR check.
  Session bad("p(X) :- q(X, Y), not p(Y).\np(X) :- px(X).\nq(a,b).\nq(b,b).");
  CHECK(bad.all("?- q(a, b).").empty());
  // With px(b) the loop instance is defused and models exist again.
  Session good("p(X) :- q(X, Y), not p(Y).\np(X) :- px(X).\nq(a,b).\nq(b,b).\npx(b).");
  CHECK(!good.all("?- q(a, b).").empty());
}
