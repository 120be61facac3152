#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sasp/error.hpp"
#include "sasp/print.hpp"
#include "sasp/solver.hpp"
#include "sasp/term.hpp"

namespace sasp {

// Reference semantics at desk scale: ground the program over a finite
// universe, then test candidate models with the Gelfond-Lifschitz reduct.
// Never used on the main solving path.
struct GroundProgram {
  struct GClause {
    int head = 0;  // 0 is the reserved false atom (headless rules)
    std::vector<int> pos;
    std::vector<int> neg;
  };

  std::vector<std::string> atom_names{"$false"};
  std::vector<Literal> atom_literals{Literal{false, false, "$false", {}}};
  std::map<std::string, int> atom_ids{{"$false", 0}};
  std::vector<GClause> clauses;

  int intern(const Literal& positive) {
    std::string key = to_string(positive);
    auto it = atom_ids.find(key);
    if (it != atom_ids.end()) return it->second;
    int id = static_cast<int>(atom_names.size());
    atom_names.push_back(key);
    atom_literals.push_back(positive);
    atom_ids.emplace(std::move(key), id);
    return id;
  }

  int lookup(const Literal& positive) const {
    auto it = atom_ids.find(to_string(positive));
    return it == atom_ids.end() ? -1 : it->second;
  }

  int atom_count() const { return static_cast<int>(atom_names.size()); }
};

struct GroundOptions {
  std::vector<Term> universe;       // empty: constants appearing in the program
  int extra_constants = 0;          // fresh constants beyond the Herbrand ones
  int term_depth = 0;               // function-symbol closure depth
  size_t instantiation_cap = 2000000;
};

namespace detail {

inline void collect_constants(const Term& t, std::vector<Term>& out, std::set<std::string>& seen) {
  if (!t.valid()) return;
  if (t.is_const() || t.is_num()) {
    if (seen.insert(to_string(t)).second) out.push_back(t);
  } else if (t.is_compound()) {
    for (const Term& a : t.args()) collect_constants(a, out, seen);
  }
}

inline std::vector<Term> program_constants(const Program& p) {
  std::vector<Term> out;
  std::set<std::string> seen;
  for (const Clause& c : p.clauses) {
    if (c.head)
      for (const Term& a : c.head->args) collect_constants(a, out, seen);
    for (const Goal& g : c.body) {
      switch (g.kind) {
        case Goal::Kind::Call:
          for (const Term& a : g.call.args) collect_constants(a, out, seen);
          break;
        case Goal::Kind::Builtin:
          collect_constants(g.lhs, out, seen);
          collect_constants(g.rhs, out, seen);
          break;
        case Goal::Kind::Forall:
          break;
      }
    }
  }
  return out;
}

// Ground arithmetic/builtin evaluation; grounding drops clauses whose
// builtins fail and drops satisfied builtins from bodies.
inline bool ground_term_number(const Term& t, Rational& out) {
  if (t.is_num()) { out = t.num(); return true; }
  if (t.is_compound()) {
    if (t.args().size() == 1 && t.name() == "-") {
      Rational a;
      if (!ground_term_number(t.args()[0], a)) return false;
      out = -a;
      return true;
    }
    if (t.args().size() == 2) {
      Rational a, b;
      if (!ground_term_number(t.args()[0], a) || !ground_term_number(t.args()[1], b))
        return false;
      if (t.name() == "+") { out = a + b; return true; }
      if (t.name() == "-") { out = a - b; return true; }
      if (t.name() == "*") { out = a * b; return true; }
      if (t.name() == "/") {
        if (b.is_zero()) return false;
        out = a / b;
        return true;
      }
    }
  }
  return false;
}

enum class BuiltinOutcome { Satisfied, Violated };

inline BuiltinOutcome eval_ground_builtin(const Goal& g) {
  switch (g.op) {
    case BuiltinOp::Unify:
      return g.lhs == g.rhs ? BuiltinOutcome::Satisfied : BuiltinOutcome::Violated;
    case BuiltinOp::Disunify:
      return g.lhs == g.rhs ? BuiltinOutcome::Violated : BuiltinOutcome::Satisfied;
    default: {
      Rational a, b;
      if (!ground_term_number(g.lhs, a) || !ground_term_number(g.rhs, b))
        return BuiltinOutcome::Violated;
      bool ok = false;
      switch (g.op) {
        case BuiltinOp::Less: ok = a < b; break;
        case BuiltinOp::Greater: ok = a > b; break;
        case BuiltinOp::Geq: ok = a >= b; break;
        case BuiltinOp::Leq: ok = a <= b; break;
        case BuiltinOp::Is: ok = a == b; break;
        case BuiltinOp::NotIs: ok = !(a == b); break;
        default: break;
      }
      return ok ? BuiltinOutcome::Satisfied : BuiltinOutcome::Violated;
    }
  }
}

}  // namespace detail

inline std::vector<Term> oracle_universe(const Program& p, const GroundOptions& opts = {}) {
  std::vector<Term> universe = opts.universe;
  if (universe.empty()) universe = detail::program_constants(p);
  for (int i = 1; i <= opts.extra_constants; ++i)
    universe.push_back(Term::constant("$c" + std::to_string(i)));
  // Function-symbol closure up to the requested depth.
  for (int d = 0; d < opts.term_depth; ++d) {
    std::set<std::string> functors;
    for (const Clause& c : p.clauses) {
      std::function<void(const Term&)> scan = [&](const Term& t) {
        if (t.is_compound()) {
          if (detail::op_prec(t.name(), t.arity()) == 0)
            functors.insert(t.name() + "/" + std::to_string(t.arity()));
          for (const Term& a : t.args()) scan(a);
        }
      };
      if (c.head)
        for (const Term& a : c.head->args) scan(a);
      for (const Goal& g : c.body)
        if (g.kind == Goal::Kind::Call)
          for (const Term& a : g.call.args) scan(a);
    }
    std::vector<Term> grown = universe;
    std::set<std::string> seen;
    for (const Term& t : universe) seen.insert(to_string(t));
    for (const std::string& f : functors) {
      auto slash = f.rfind('/');
      std::string name = f.substr(0, slash);
      int arity = std::stoi(f.substr(slash + 1));
      if (arity != 1) continue;  // deeper signatures explode; depth bound is per unary layer
      for (const Term& t : universe) {
        Term built = Term::compound(name, {t});
        if (seen.insert(to_string(built)).second) grown.push_back(built);
      }
    }
    universe = std::move(grown);
  }
  return universe;
}

// Instantiates every clause over the universe, evaluating builtins away.
inline GroundProgram ground(const Program& p, const GroundOptions& opts = {}) {
  std::vector<Term> universe = oracle_universe(p, opts);
  GroundProgram gp;
  size_t instantiations = 0;

  for (const Clause& c : p.clauses) {
    std::vector<VarId> vars = clause_vars(c);
    size_t combos = 1;
    for (size_t i = 0; i < vars.size(); ++i) {
      combos *= std::max<size_t>(universe.size(), 1);
      if (combos > opts.instantiation_cap)
        throw UniverseTooLarge(std::to_string(vars.size()) + " variables over " +
                               std::to_string(universe.size()) + " values");
    }
    std::vector<size_t> idx(vars.size(), 0);
    for (;;) {
      if (++instantiations > opts.instantiation_cap)
        throw UniverseTooLarge("instantiation cap reached");
      std::map<VarId, Term> sub;
      for (size_t i = 0; i < vars.size(); ++i) sub.emplace(vars[i], universe[idx[i]]);

      GroundProgram::GClause gc;
      bool dropped = false;
      for (const Goal& g : c.body) {
        Goal inst = substitute(g, sub);
        if (inst.kind == Goal::Kind::Builtin) {
          if (detail::eval_ground_builtin(inst) == detail::BuiltinOutcome::Violated) {
            dropped = true;
            break;
          }
          continue;  // satisfied builtins vanish
        }
        Literal lit = inst.call;
        bool naf = lit.naf;
        lit.naf = false;
        int id = gp.intern(lit);
        (naf ? gc.neg : gc.pos).push_back(id);
      }
      if (!dropped) {
        if (c.head) gc.head = gp.intern(substitute(*c.head, sub));
        gp.clauses.push_back(std::move(gc));
      }

      if (vars.empty()) break;
      size_t i = 0;
      while (i < vars.size() && ++idx[i] == universe.size()) idx[i++] = 0;
      if (i == vars.size()) break;
    }
  }

  // A call and its classical complement cannot both hold.
  for (int id = 1; id < gp.atom_count(); ++id) {
    const Literal& lit = gp.atom_literals[id];
    if (!lit.classical) continue;
    Literal twin = lit;
    twin.classical = false;
    int other = gp.lookup(twin);
    if (other >= 0) gp.clauses.push_back({0, {id, other}, {}});
  }
  return gp;
}

// Step 1 and 2 of the GL method: delete clauses contradicted by the
// candidate and strip the remaining negated goals.
inline GroundProgram gl_reduct(const GroundProgram& gp, const std::set<int>& m) {
  GroundProgram out;
  out.atom_names = gp.atom_names;
  out.atom_literals = gp.atom_literals;
  out.atom_ids = gp.atom_ids;
  for (const auto& c : gp.clauses) {
    bool deleted = false;
    for (int n : c.neg)
      if (m.count(n)) { deleted = true; break; }
    if (deleted) continue;
    out.clauses.push_back({c.head, c.pos, {}});
  }
  return out;
}

// Immediate-consequence iteration to the least fixed point of a positive
// program.
inline std::set<int> least_model(const GroundProgram& gp) {
  std::set<int> model;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : gp.clauses) {
      if (model.count(c.head)) continue;
      bool fire = true;
      for (int a : c.pos)
        if (!model.count(a)) { fire = false; break; }
      if (fire) {
        model.insert(c.head);
        changed = true;
      }
    }
  }
  return model;
}

inline bool is_stable_model(const GroundProgram& gp, const std::set<int>& m) {
  if (m.count(0)) return false;
  return least_model(gl_reduct(gp, m)) == m;
}

// Exhaustive stable-model enumeration by binary counting over the atoms.
inline std::vector<std::set<int>> enumerate_stable_models(const GroundProgram& gp,
                                                          int atom_bound = 20) {
  int n = gp.atom_count() - 1;  // excluding the false atom
  if (n > atom_bound)
    throw AtomBoundExceeded(std::to_string(n) + " atoms > bound " + std::to_string(atom_bound));
  std::vector<std::set<int>> out;
  for (unsigned long long mask = 0; mask < (1ull << n); ++mask) {
    std::set<int> m;
    for (int i = 0; i < n; ++i)
      if (mask & (1ull << i)) m.insert(i + 1);
    if (is_stable_model(gp, m)) out.push_back(std::move(m));
  }
  return out;
}

// Alternating fixpoint: atoms true in the well-founded semantics belong to
// every stable model and false ones to none; used to narrow candidate
// enumeration during conformance checks.
inline std::pair<std::set<int>, std::set<int>> well_founded(const GroundProgram& gp) {
  std::set<int> lower;  // true atoms
  std::set<int> upper;  // possibly-true atoms
  for (int i = 0; i < gp.atom_count(); ++i) upper.insert(i);
  for (;;) {
    std::set<int> new_lower = least_model(gl_reduct(gp, upper));
    std::set<int> new_upper = least_model(gl_reduct(gp, new_lower));
    if (new_lower == lower && new_upper == upper) break;
    lower = std::move(new_lower);
    upper = std::move(new_upper);
  }
  std::set<int> wf_false;
  for (int i = 1; i < gp.atom_count(); ++i)
    if (!upper.count(i)) wf_false.insert(i);
  lower.erase(0);
  return {lower, wf_false};
}

struct VerifyOptions {
  int atom_bound = 20;          // residual enumeration bound
  size_t witness_cap = 20000;   // loop-variable witness assignments tried
};

struct VerifyResult {
  bool ok = false;
  std::string witness;  // explanation: the embedding model or the failure
};

namespace detail {

inline bool ground_equal(const Term& a, const Term& b) { return to_string(a) == to_string(b); }

// Expands one partial-model literal into ground instances: loop variables
// use the supplied witness assignment, remaining variables range over every
// admissible universe value.
inline bool expand_literal(const Literal& lit, const std::vector<Term>& universe,
                           const std::map<VarId, Term>& witness,
                           const std::map<VarId, std::vector<Term>>& constraints,
                           std::vector<Literal>& out) {
  std::vector<VarId> vars;
  std::set<VarId> seen;
  for (const Term& a : lit.args) collect_vars(a, vars, seen);
  std::vector<VarId> free_vars;
  std::map<VarId, Term> base;
  for (VarId v : vars) {
    auto w = witness.find(v);
    if (w != witness.end())
      base.emplace(v, w->second);
    else
      free_vars.push_back(v);
  }
  Literal seeded = substitute(lit, base);
  std::vector<std::vector<Term>> choices;
  for (VarId v : free_vars) {
    std::vector<Term> vals;
    auto c = constraints.find(v);
    for (const Term& u : universe) {
      bool blocked = false;
      if (c != constraints.end())
        for (const Term& e : c->second)
          if (ground_equal(e, u)) { blocked = true; break; }
      if (!blocked) vals.push_back(u);
    }
    if (vals.empty()) return false;  // empty domain over this finite universe
    choices.push_back(std::move(vals));
  }
  std::vector<size_t> idx(free_vars.size(), 0);
  for (;;) {
    std::map<VarId, Term> sub;
    for (size_t i = 0; i < free_vars.size(); ++i) sub.emplace(free_vars[i], choices[i][idx[i]]);
    out.push_back(substitute(seeded, sub));
    if (free_vars.empty()) break;
    size_t i = 0;
    while (i < free_vars.size() && ++idx[i] == choices[i].size()) idx[i++] = 0;
    if (i == free_vars.size()) break;
  }
  return true;
}

}  // namespace detail

// Does some stable model of gp contain every positive literal of the
// partial model (grounded over the universe) and exclude every negated one?
// Loop variables are instantiated existentially (one admissible witness
// suffices), other variables universally.
inline VerifyResult verify_partial_model(const GroundProgram& gp, const PartialModel& pm,
                                         const std::vector<Term>& universe,
                                         VerifyOptions opts = {}) {
  // Collect the visible literals and the loop variables they mention.
  std::vector<Literal> visible;
  std::vector<VarId> loopvars;
  std::set<VarId> loopseen;
  for (const Literal& l : pm.entries) {
    if (is_internal_predicate(l.predicate)) continue;
    visible.push_back(l);
    std::vector<VarId> vs;
    std::set<VarId> seen;
    for (const Term& a : l.args) collect_vars(a, vs, seen);
    for (VarId v : vs)
      if (pm.loopvars.count(v) && loopseen.insert(v).second) loopvars.push_back(v);
  }

  auto [wf_true, wf_false] = well_founded(gp);

  // Candidate witness values per loop variable.
  std::vector<std::vector<Term>> lv_choices;
  for (VarId v : loopvars) {
    std::vector<Term> vals;
    auto c = pm.constraints.find(v);
    for (const Term& u : universe) {
      bool blocked = false;
      if (c != pm.constraints.end())
        for (const Term& e : c->second)
          if (detail::ground_equal(e, u)) { blocked = true; break; }
      if (!blocked) vals.push_back(u);
    }
    if (vals.empty()) return {false, "loop variable has an empty domain over the universe"};
    lv_choices.push_back(std::move(vals));
  }

  size_t tried = 0;
  std::vector<size_t> idx(loopvars.size(), 0);
  std::string last_reason = "no witness assignment found";
  for (;;) {
    if (++tried > opts.witness_cap) return {false, "witness cap exceeded"};
    std::map<VarId, Term> witness;
    for (size_t i = 0; i < loopvars.size(); ++i) witness.emplace(loopvars[i], lv_choices[i][idx[i]]);

    // Ground the partial model under this witness.
    std::set<int> pos, neg;
    bool feasible = true;
    std::string reason;
    for (const Literal& l : visible) {
      std::vector<Literal> inst;
      if (!detail::expand_literal(l, universe, witness, pm.constraints, inst)) {
        feasible = false;
        reason = "variable in " + to_string(l) + " has an empty domain";
        break;
      }
      for (Literal& g : inst) {
        bool naf = g.naf;
        g.naf = false;
        int id = gp.lookup(g);
        if (id < 0) {
          if (!naf) {
            feasible = false;
            reason = to_string(g) + " is not derivable in any grounding";
            break;
          }
          continue;  // unknown atoms are never derivable; the negation holds
        }
        (naf ? neg : pos).insert(id);
      }
      if (!feasible) break;
    }
    if (feasible) {
      for (int a : pos)
        if (neg.count(a)) {
          feasible = false;
          reason = "grounding is inconsistent on " + gp.atom_names[a];
          break;
        }
    }
    if (feasible) {
      for (int a : pos)
        if (wf_false.count(a)) { feasible = false; reason = gp.atom_names[a] + " is false in every stable model"; break; }
      if (feasible)
        for (int a : neg)
          if (wf_true.count(a)) { feasible = false; reason = gp.atom_names[a] + " is true in every stable model"; break; }
    }
    if (feasible) {
      // Enumerate completions over the still-undetermined atoms.
      std::vector<int> undetermined;
      for (int i = 1; i < gp.atom_count(); ++i)
        if (!pos.count(i) && !neg.count(i) && !wf_true.count(i) && !wf_false.count(i))
          undetermined.push_back(i);
      if (static_cast<int>(undetermined.size()) > opts.atom_bound)
        throw AtomBoundExceeded(std::to_string(undetermined.size()) + " undetermined atoms");
      for (unsigned long long mask = 0; mask < (1ull << undetermined.size()); ++mask) {
        std::set<int> candidate = pos;
        candidate.insert(wf_true.begin(), wf_true.end());
        for (size_t i = 0; i < undetermined.size(); ++i)
          if (mask & (1ull << i)) candidate.insert(undetermined[i]);
        bool clash = false;
        for (int a : neg)
          if (candidate.count(a)) { clash = true; break; }
        if (clash) continue;
        if (is_stable_model(gp, candidate)) {
          std::string m = "{";
          for (int a : candidate) m += " " + gp.atom_names[a];
          return {true, m + " }"};
        }
      }
      reason = "no stable model embeds this grounding";
    }
    last_reason = reason;

    if (loopvars.empty()) break;
    size_t i = 0;
    while (i < loopvars.size() && ++idx[i] == lv_choices[i].size()) idx[i++] = 0;
    if (i == loopvars.size()) break;
  }
  return {false, last_reason};
}

}  // namespace sasp
