#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sasp/analysis.hpp"
#include "sasp/term.hpp"

namespace sasp {

// Generated predicate names start with '$', which the source lexer rejects,
// so they can never collide with user predicates.
inline constexpr const char* kNmrCheckName = "$nmr_check";

inline bool is_internal_predicate(const std::string& name) {
  return !name.empty() && name[0] == '$';
}

// Replaces repeated head arguments and non-variable head arguments with
// fresh variables, prepending the equivalent unification goals. After this,
// every head is a tuple of distinct variables.
inline Clause abstract_head(const Clause& c, IdGen& gen) {
  if (!c.head) return c;
  std::set<VarId> seen;
  std::vector<Goal> prefix;
  std::vector<Term> new_args;

  // Replaces later occurrences of already-seen variables inside a compound,
  // collecting `Orig = Fresh` goals.
  std::function<Term(const Term&)> dedup_inner = [&](const Term& t) -> Term {
    if (t.is_var()) {
      if (seen.insert(t.var_id()).second) return t;
      Term fresh = Term::var(gen.fresh());
      prefix.push_back(Goal::builtin(BuiltinOp::Unify, t, fresh));
      return fresh;
    }
    if (t.is_compound()) {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const Term& a : t.args()) args.push_back(dedup_inner(a));
      return Term::compound(t.name(), std::move(args));
    }
    return t;
  };

  for (const Term& arg : c.head->args) {
    if (arg.is_var()) {
      if (seen.insert(arg.var_id()).second) {
        new_args.push_back(arg);
      } else {
        Term fresh = Term::var(gen.fresh());
        prefix.push_back(Goal::builtin(BuiltinOp::Unify, arg, fresh));
        new_args.push_back(fresh);
      }
      continue;
    }
    Term fresh = Term::var(gen.fresh());
    size_t at = prefix.size();
    Term cleaned = dedup_inner(arg);
    prefix.insert(prefix.begin() + at, Goal::builtin(BuiltinOp::Unify, fresh, cleaned));
    new_args.push_back(fresh);
  }

  Clause out;
  out.loc = c.loc;
  Literal h = *c.head;
  h.args = std::move(new_args);
  out.head = std::move(h);
  out.body.reserve(prefix.size() + c.body.size());
  for (Goal& g : prefix) out.body.push_back(std::move(g));
  for (const Goal& g : c.body) out.body.push_back(g);
  return out;
}

inline Program abstract_heads(const Program& p, IdGen& gen) {
  Program out;
  for (const Clause& c : p.clauses) out.add(abstract_head(c, gen));
  return out;
}

// DeMorgan complement of a single goal. NAF sign flips on literals, `=` and
// `\=` swap, comparisons map to their complements, `is` maps to a
// disunification against the evaluated expression.
inline Goal negate_goal(const Goal& g) {
  switch (g.kind) {
    case Goal::Kind::Call: {
      Literal l = g.call;
      l.naf = !l.naf;
      return Goal::literal(std::move(l));
    }
    case Goal::Kind::Builtin:
      switch (g.op) {
        case BuiltinOp::Unify: return Goal::builtin(BuiltinOp::Disunify, g.lhs, g.rhs);
        case BuiltinOp::Disunify: return Goal::builtin(BuiltinOp::Unify, g.lhs, g.rhs);
        case BuiltinOp::Less: return Goal::builtin(BuiltinOp::Geq, g.lhs, g.rhs);
        case BuiltinOp::Geq: return Goal::builtin(BuiltinOp::Less, g.lhs, g.rhs);
        case BuiltinOp::Greater: return Goal::builtin(BuiltinOp::Leq, g.lhs, g.rhs);
        case BuiltinOp::Leq: return Goal::builtin(BuiltinOp::Greater, g.lhs, g.rhs);
        case BuiltinOp::Is: return Goal::builtin(BuiltinOp::NotIs, g.lhs, g.rhs);
        case BuiltinOp::NotIs: return Goal::builtin(BuiltinOp::Is, g.lhs, g.rhs);
      }
      break;
    case Goal::Kind::Forall:
      break;
  }
  // Foralls appear only in generated code, which is never dualized again.
  throw std::logic_error("negate_goal: forall cannot be negated");
}

namespace detail {

// One clause per goal prefix: the t-th dual clause re-executes every goal
// before t and negates goal t.
inline void prefix_dual_clauses(const Clause& c, const Literal& head, Program& out) {
  for (size_t t = 0; t < c.body.size(); ++t) {
    Clause d;
    d.head = head;
    d.loc = c.loc;
    for (size_t j = 0; j < t; ++j) d.body.push_back(c.body[j]);
    d.body.push_back(negate_goal(c.body[t]));
    out.add(std::move(d));
  }
}

inline std::vector<VarId> body_vars(const Clause& c) {
  std::set<VarId> head_ids;
  if (c.head)
    for (const Term& a : c.head->args) {
      // Heads are abstracted: every argument is a distinct variable.
      head_ids.insert(a.var_id());
    }
  std::vector<VarId> out;
  for (VarId v : clause_vars(c))
    if (!head_ids.count(v)) out.push_back(v);
  return out;
}

// forall(B1, forall(B2, ... call ...)) over the given variables.
inline Goal forall_nest(const std::vector<Term>& vars, Goal call) {
  Goal g = std::move(call);
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) g = Goal::forall(*it, std::move(g));
  return g;
}

inline std::string mangle_pred(const PredRef& p) {
  return (p.classical ? "c_" : "") + p.name + "_" + std::to_string(p.arity);
}

// Collects every predicate identity (positive form) appearing in heads or
// body literals of the program.
inline std::set<PredRef> collect_preds(const Program& p) {
  std::set<PredRef> out;
  for (const Clause& c : p.clauses) {
    if (c.head) out.insert(c.head->positive_pred());
    for (const Goal& g : c.body)
      scan_goal_literals(g, [&](const Literal& l) { out.insert(l.positive_pred()); });
  }
  return out;
}

}  // namespace detail

// Generates the dual rules for every predicate of the (head-abstracted)
// program. For each predicate q/n with clauses C1..Ck the dual is
//   not q(V..) :- D1, ..., Dk.
// where Di re-derives the failure of clause Ci: a set of goal-prefix clauses
// under a helper head carrying the head variables plus Ci's body variables,
// called under foralls over the body variables. A single clause without body
// variables inlines its prefix clauses directly under `not q`. Predicates
// without clauses get the unconditional dual fact.
inline Program generate_duals(const Program& abstracted, IdGen& gen) {
  Program duals;
  std::set<PredRef> preds = detail::collect_preds(abstracted);

  for (const PredRef& p : preds) {
    if (is_internal_predicate(p.name)) continue;
    auto it = abstracted.index.find(p);
    const std::vector<int>* clause_ids = it == abstracted.index.end() ? nullptr : &it->second;

    auto fresh_head_vars = [&] {
      std::vector<Term> vs;
      for (int i = 0; i < p.arity; ++i) vs.push_back(Term::var(gen.fresh()));
      return vs;
    };

    if (!clause_ids || clause_ids->empty()) {
      Clause fact;
      fact.head = Literal{true, p.classical, p.name, fresh_head_vars()};
      duals.add(std::move(fact));
      continue;
    }

    int k = static_cast<int>(clause_ids->size());
    if (k == 1) {
      const Clause& c = abstracted.clauses[(*clause_ids)[0]];
      std::vector<VarId> bvars = detail::body_vars(c);
      if (bvars.empty()) {
        Literal nh{true, p.classical, p.name, c.head->args};
        detail::prefix_dual_clauses(c, nh, duals);
        continue;
      }
      // Helper with head vars + body vars; the dual wraps it in foralls.
      std::vector<Term> params = c.head->args;
      for (VarId v : bvars) params.push_back(Term::var(v));
      Literal helper{false, false, "$np1_" + detail::mangle_pred(p), params};
      detail::prefix_dual_clauses(c, helper, duals);

      std::vector<Term> call_head = fresh_head_vars();
      std::vector<Term> call_quant;
      for (size_t i = 0; i < bvars.size(); ++i) call_quant.push_back(Term::var(gen.fresh()));
      std::vector<Term> call_args = call_head;
      for (const Term& q : call_quant) call_args.push_back(q);
      Clause wrapper;
      wrapper.head = Literal{true, p.classical, p.name, call_head};
      wrapper.body.push_back(detail::forall_nest(
          call_quant, Goal::literal(Literal{false, false, helper.predicate, call_args})));
      duals.add(std::move(wrapper));
      continue;
    }

    // k >= 2: one helper per clause, conjoined under `not q`.
    std::vector<Term> top_vars = fresh_head_vars();
    Clause top;
    top.head = Literal{true, p.classical, p.name, top_vars};
    for (int i = 0; i < k; ++i) {
      const Clause& c = abstracted.clauses[(*clause_ids)[i]];
      std::vector<VarId> bvars = detail::body_vars(c);
      std::string hname = "$np" + std::to_string(i + 1) + "_" + detail::mangle_pred(p);

      std::vector<Term> params = c.head->args;
      for (VarId v : bvars) params.push_back(Term::var(v));
      detail::prefix_dual_clauses(c, Literal{false, false, hname, params}, duals);

      std::vector<Term> call_quant;
      for (size_t j = 0; j < bvars.size(); ++j) call_quant.push_back(Term::var(gen.fresh()));
      std::vector<Term> call_args = top_vars;
      for (const Term& q : call_quant) call_args.push_back(q);
      top.body.push_back(detail::forall_nest(
          call_quant, Goal::literal(Literal{false, false, hname, call_args})));
    }
    duals.add(std::move(top));
  }
  return duals;
}

struct NmrCheck {
  Program checks;   // sub-check clauses
  Clause nmr_clause;  // $nmr_check :- sub-check calls.
};

// Builds the NMR check: for each OLON rule, append the negation of its head
// to the body (when absent), dualize under a fresh sub-check head, quantify
// body variables with foralls while creating the sub-check, and wrap the
// remaining free variables in foralls at the call site.
inline NmrCheck generate_nmr_check(const Program& abstracted, const RuleClassification& rc,
                                   IdGen& gen) {
  NmrCheck out;
  out.nmr_clause.head = Literal{false, false, kNmrCheckName, {}};
  int seq = 0;

  for (int cid = 0; cid < static_cast<int>(abstracted.clauses.size()); ++cid) {
    if (!rc.by_clause[cid].olon) continue;
    const Clause& cl = abstracted.clauses[cid];
    ++seq;

    if (cl.head) {
      Clause mod = cl;
      // Append `not head` as the last body goal unless already present.
      bool present = false;
      for (const Goal& g : mod.body) {
        if (g.kind != Goal::Kind::Call) continue;
        const Literal& l = g.call;
        if (l.naf && l.classical == cl.head->classical && l.predicate == cl.head->predicate &&
            l.args.size() == cl.head->args.size()) {
          bool same = true;
          for (size_t i = 0; i < l.args.size(); ++i)
            if (!(l.args[i] == cl.head->args[i])) same = false;
          if (same) { present = true; break; }
        }
      }
      if (!present) {
        Literal nh = *cl.head;
        nh.naf = true;
        mod.body.push_back(Goal::literal(std::move(nh)));
      }

      std::string base = "$chk" + std::to_string(seq) + "_" +
                         detail::mangle_pred(cl.head->positive_pred());
      std::vector<VarId> bvars = detail::body_vars(mod);
      Literal sub{false, false, base, cl.head->args};
      if (bvars.empty()) {
        detail::prefix_dual_clauses(mod, sub, out.checks);
      } else {
        std::vector<Term> params = cl.head->args;
        for (VarId v : bvars) params.push_back(Term::var(v));
        Literal inner{false, false, base + "_b", params};
        detail::prefix_dual_clauses(mod, inner, out.checks);

        std::vector<Term> quant;
        for (size_t i = 0; i < bvars.size(); ++i) quant.push_back(Term::var(gen.fresh()));
        std::vector<Term> call_args = cl.head->args;
        for (const Term& q : quant) call_args.push_back(q);
        Clause wrapper;
        wrapper.head = sub;
        wrapper.loc = cl.loc;
        wrapper.body.push_back(detail::forall_nest(
            quant, Goal::literal(Literal{false, false, inner.predicate, call_args})));
        out.checks.add(std::move(wrapper));
      }

      // Call site: every head variable universally quantified.
      std::vector<Term> site_vars;
      for (size_t i = 0; i < cl.head->args.size(); ++i) site_vars.push_back(Term::var(gen.fresh()));
      out.nmr_clause.body.push_back(detail::forall_nest(
          site_vars, Goal::literal(Literal{false, false, base, site_vars})));
    } else {
      // Headless rule: every variable is a body variable; the forall
      // wrappers are applied while creating the sub-check.
      std::string base = "$chk" + std::to_string(seq) + "_hl";
      std::vector<VarId> bvars = clause_vars(cl);
      if (bvars.empty()) {
        detail::prefix_dual_clauses(cl, Literal{false, false, base, {}}, out.checks);
      } else {
        std::vector<Term> params;
        for (VarId v : bvars) params.push_back(Term::var(v));
        Literal inner{false, false, base + "_b", params};
        detail::prefix_dual_clauses(cl, inner, out.checks);

        std::vector<Term> quant;
        for (size_t i = 0; i < bvars.size(); ++i) quant.push_back(Term::var(gen.fresh()));
        Clause wrapper;
        wrapper.head = Literal{false, false, base, {}};
        wrapper.loc = cl.loc;
        wrapper.body.push_back(detail::forall_nest(
            quant, Goal::literal(Literal{false, false, inner.predicate, quant})));
        out.checks.add(std::move(wrapper));
      }
      out.nmr_clause.body.push_back(Goal::literal(Literal{false, false, base, {}}));
    }
  }
  return out;
}

// The executable program: head-abstracted originals, dual rules, and the
// NMR check, indexed by sign-inclusive predicate identity. Immutable once
// built; safe to share across solver sessions.
class TransformedProgram {
public:
  TransformedProgram(Program originals, Program duals, NmrCheck nmr,
                     std::set<PredRef> source_preds)
      : originals_(std::move(originals)),
        duals_(std::move(duals)),
        checks_(std::move(nmr.checks)),
        nmr_clause_(std::move(nmr.nmr_clause)),
        known_(std::move(source_preds)) {
    checks_.add(nmr_clause_);
    // Headless originals are not executable rules (their constraints live in
    // the NMR check); they stay in the program only for dumping.
    for (const Program* p : {&originals_, &duals_, &checks_})
      for (const Clause& c : p->clauses)
        if (c.head) index_[c.head->pred()].push_back(&c);
    // Seed empty rule sets so "known predicate without clauses" is
    // distinguishable from "never-seen predicate".
    for (const PredRef& p : known_) {
      index_.try_emplace(p);
      PredRef n = p;
      n.naf = true;
      index_.try_emplace(n);
    }
  }

  TransformedProgram(const TransformedProgram&) = delete;
  TransformedProgram& operator=(const TransformedProgram&) = delete;
  // Moving is safe: vector buffers (and the clauses the index points at)
  // keep their addresses.
  TransformedProgram(TransformedProgram&&) = default;
  TransformedProgram& operator=(TransformedProgram&&) = default;

  const Program& originals() const { return originals_; }
  const Program& duals() const { return duals_; }
  const Program& checks() const { return checks_; }

  // nullptr: unknown predicate. Otherwise the (possibly empty) rule set.
  const std::vector<const Clause*>* rules(const PredRef& p) const {
    auto it = index_.find(p);
    return it == index_.end() ? nullptr : &it->second;
  }

  Literal nmr_call() const { return Literal{false, false, kNmrCheckName, {}}; }

  const std::map<PredRef, std::vector<const Clause*>>& index() const { return index_; }

private:
  Program originals_;
  Program duals_;
  Program checks_;
  Clause nmr_clause_;
  std::set<PredRef> known_;
  std::map<PredRef, std::vector<const Clause*>> index_;
};

inline TransformedProgram transform(const Program& source, IdGen& gen) {
  RuleClassification rc = detect_olon_rules(build_call_graph(source), source);
  Program abstracted = abstract_heads(source, gen);
  Program duals = generate_duals(abstracted, gen);
  NmrCheck nmr = generate_nmr_check(abstracted, rc, gen);
  return TransformedProgram(std::move(abstracted), std::move(duals), std::move(nmr),
                            detail::collect_preds(source));
}

}  // namespace sasp
