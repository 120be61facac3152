#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sasp/constraints.hpp"
#include "sasp/error.hpp"
#include "sasp/transform.hpp"

namespace sasp {

struct SolverConfig {
  std::optional<size_t> depth_limit;  // bound on call-stack height
  bool append_nmr = true;             // tests may probe goals without the NMR check
};

// A successful derivation: the CHS snapshot plus query bindings. All terms
// are resolved against the store at snapshot time, so the model outlives
// backtracking.
struct PartialModel {
  std::vector<Literal> entries;  // CHS in insertion order, internal ones included
  std::vector<std::pair<std::string, Term>> bindings;  // query variable -> term
  std::map<VarId, std::vector<Term>> constraints;      // prohibited lists for display
  std::set<VarId> loopvars;
};

// Coinductive SLD engine. One solver = one session over an immutable
// TransformedProgram; the program may be shared between sessions, a solver
// instance may not.
class Solver {
public:
  Solver(const TransformedProgram& tp, IdGen gen, SolverConfig cfg = {})
      : tp_(tp), gen_(gen), cfg_(cfg) {}

  using Cont = std::function<bool()>;

  enum class Outcome { Exhausted, Stopped };

  // Runs the query followed by the NMR check. `on_model` receives each
  // partial model; returning false stops the search, true asks for the next
  // model via backtracking.
  Outcome run(const std::vector<Goal>& query,
              const std::vector<std::pair<std::string, Term>>& query_vars,
              const std::function<bool(const PartialModel&)>& on_model) {
    std::vector<Goal> goals = query;
    if (cfg_.append_nmr) goals.push_back(Goal::literal(tp_.nmr_call()));
    bool stopped = exec_goals(goals, 0, 0, [&] {
      if (!check_loop_variable_domains()) return false;
      PartialModel pm = snapshot(query_vars);
      return !on_model(pm);  // stop when the callback declines more models
    });
    return stopped ? Outcome::Stopped : Outcome::Exhausted;
  }

  // --- pieces exposed for unit tests ------------------------------------

  BindingStore& store() { return store_; }

  bool exec_goal_for_test(const Goal& g, const std::function<bool()>& k) {
    return exec_goal(g, 0, k);
  }

  const std::vector<Literal>& chs() const { return chs_; }

  bool chs_insert_for_test(const Literal& l) { return chs_insert(l); }

  // Runs only the coinductive-failure filter stage for g: `proceed` fires
  // once per blocking alternative with the constraints applied. Returns the
  // filter outcome kinds so tests can model the whole check.
  enum class ChsCheck { Failure, Success, NoFilterNeeded, Filtered, NoAlternative };
  ChsCheck check_chs_for_test(const Literal& g, const Cont& proceed) {
    for (const Literal& comp : complements(g))
      for (const Literal& e : chs_)
        if (same_pred(e, comp) && is_exact_match(e, comp, store_)) return ChsCheck::Failure;
    for (const Literal& e : chs_)
      if (same_pred(e, g) && is_exact_match(e, g, store_)) return ChsCheck::Success;
    std::vector<size_t> entries = unifiable_complement_entries(g);
    if (entries.empty()) return ChsCheck::NoFilterNeeded;
    bool any = false;
    try_filter_alternatives(g, entries, [&] {
      any = true;
      return proceed();
    });
    return any ? ChsCheck::Filtered : ChsCheck::NoAlternative;
  }

  size_t choicepoint_probes = 0;  // incremented per non-deterministic alternative taken

  struct Stats {
    size_t calls = 0;
    size_t expands = 0;
    size_t foralls = 0;
    size_t chs_scans = 0;
    size_t max_chs = 0;
    size_t max_stack = 0;
  };
  Stats stats;

private:
  struct Frame {
    Literal goal;
    int neg_depth = 0;
    std::vector<VarId> pending_loopvars;
  };

  struct Checkpoint {
    BindingStore::Checkpoint store_cp;
    size_t chs_size;
  };

  Checkpoint checkpoint() const { return {store_.checkpoint(), chs_.size()}; }
  void restore(const Checkpoint& cp) {
    store_.restore(cp.store_cp);
    chs_.resize(cp.chs_size);
  }

  // --- goal scheduling ----------------------------------------------------

  bool exec_goals(const std::vector<Goal>& goals, size_t i, int depth, const Cont& k) {
    if (i == goals.size()) return k();
    return exec_goal(goals[i], depth, [&, i] { return exec_goals(goals, i + 1, depth, k); });
  }

  bool exec_goal(const Goal& g, int depth, const Cont& k) {
    switch (g.kind) {
      case Goal::Kind::Builtin:
        return exec_builtin(g, k);
      case Goal::Kind::Forall:
        return exec_forall(g.quant_var, *g.quant_body, depth, k);
      case Goal::Kind::Call:
        return exec_call(g.call, depth, k);
    }
    return false;
  }

  // --- builtins -------------------------------------------------------------

  bool exec_builtin(const Goal& g, const Cont& k) {
    switch (g.op) {
      case BuiltinOp::Unify: {
        Checkpoint cp = checkpoint();
        bool stop = constructive_unify(g.lhs, g.rhs, store_) && k();
        if (!stop) restore(cp);
        return stop;
      }
      case BuiltinOp::Disunify:
        return constructive_disunify(g.lhs, g.rhs, store_, k);
      case BuiltinOp::Is: {
        Rational v = eval_arith(g.rhs);
        Checkpoint cp = checkpoint();
        bool stop = constructive_unify(g.lhs, Term::number(v), store_) && k();
        if (!stop) restore(cp);
        return stop;
      }
      case BuiltinOp::NotIs: {
        Rational v = eval_arith(g.rhs);
        return constructive_disunify(g.lhs, Term::number(v), store_, k);
      }
      case BuiltinOp::Less:
      case BuiltinOp::Greater:
      case BuiltinOp::Geq:
      case BuiltinOp::Leq:
        return compare_arith(g.op, g.lhs, g.rhs) && k();
    }
    return false;
  }

public:
  // Exact rational evaluation over + - * /; operands must be ground numbers.
  Rational eval_arith(const Term& e) {
    Term t = store_.deref(e);
    switch (t.kind()) {
      case Term::Kind::Num:
        return t.num();
      case Term::Kind::Var:
        throw NonGroundArithmetic(to_string(t));
      case Term::Kind::Const:
        throw NonGroundArithmetic(to_string(t));
      case Term::Kind::Compound: {
        if (t.args().size() == 1 && t.name() == "-") return -eval_arith(t.args()[0]);
        if (t.args().size() == 2) {
          Rational a = eval_arith(t.args()[0]);
          Rational b = eval_arith(t.args()[1]);
          if (t.name() == "+") return a + b;
          if (t.name() == "-") return a - b;
          if (t.name() == "*") return a * b;
          if (t.name() == "/") {
            if (b.is_zero()) throw DivisionByZero();
            return a / b;
          }
        }
        throw NonGroundArithmetic(to_string(t));
      }
    }
    throw NonGroundArithmetic(to_string(t));
  }

  bool compare_arith(BuiltinOp op, const Term& lhs, const Term& rhs) {
    Rational a = eval_arith(lhs);
    Rational b = eval_arith(rhs);
    switch (op) {
      case BuiltinOp::Less: return a < b;
      case BuiltinOp::Greater: return a > b;
      case BuiltinOp::Geq: return a >= b;
      case BuiltinOp::Leq: return a <= b;
      default: return false;
    }
  }

private:
  // --- CHS ------------------------------------------------------------------

  // Literal complements whose CHS presence excludes g: the NAF flip always,
  // and the classical complement for non-NAF goals (`p` vs `-p`).
  static std::vector<Literal> complements(const Literal& g) {
    std::vector<Literal> out{g.negated()};
    if (!g.naf) {
      Literal c = g;
      c.classical = !c.classical;
      out.push_back(std::move(c));
    }
    return out;
  }

  bool literal_args_unifiable(const Literal& a, const Literal& b) {
    BindingStore::Checkpoint cp = store_.checkpoint();
    bool ok = true;
    try {
      for (size_t i = 0; i < a.args.size() && ok; ++i)
        ok = detail::unify_rec(a.args[i], b.args[i], store_, true);
    } catch (...) {
      store_.restore(cp);
      throw;
    }
    store_.restore(cp);
    return ok;
  }

  static bool same_pred(const Literal& a, const Literal& b) {
    return a.naf == b.naf && a.classical == b.classical && a.predicate == b.predicate &&
           a.args.size() == b.args.size();
  }

  // Inserting a literal whose complement has an exact match in the CHS
  // would make the hypothesis set inconsistent; the insertion fails and
  // triggers backtracking. Duplicates are no-ops.
  bool chs_insert(const Literal& g) {
    for (const Literal& comp : complements(g))
      for (const Literal& e : chs_)
        if (same_pred(e, comp) && is_exact_match(e, comp, store_)) return false;
    for (const Literal& e : chs_)
      if (same_pred(e, g) && is_exact_match(e, g, store_)) return true;
    chs_.push_back(g);
    return true;
  }

  // --- the coinductive failure filter ---------------------------------------

  struct FilterCandidate {
    enum class Kind { Bind, Disunify, LoopvarConstrain } kind;
    Term goal_arg;
    Term value;  // Bind: list member to ground to; Disunify/Loopvar: CHS-side term
    std::string key;
  };

  // All CHS entries some complement of g still unifies with.
  std::vector<size_t> unifiable_complement_entries(const Literal& g) {
    std::vector<size_t> out;
    std::vector<Literal> comps = complements(g);
    for (size_t idx = 0; idx < chs_.size(); ++idx)
      for (const Literal& comp : comps)
        if (same_pred(chs_[idx], comp) && literal_args_unifiable(chs_[idx], comp)) {
          out.push_back(idx);
          break;
        }
    return out;
  }

  bool filter_blocked(const Literal& g, const std::vector<size_t>& entries) {
    std::vector<Literal> comps = complements(g);
    for (size_t idx : entries)
      for (const Literal& comp : comps)
        if (same_pred(chs_[idx], comp) && literal_args_unifiable(chs_[idx], comp)) return false;
    return true;
  }

  // Post-condition of the filter: the complement of g unifies with no CHS
  // entry at all (narrowing can only remove unifications, so checking the
  // previously unifiable entries plus this assertion keeps the set clean).
  void assert_filter_postcondition(const Literal& g) {
    std::vector<Literal> comps = complements(g);
    for (const Literal& e : chs_)
      for (const Literal& comp : comps)
        if (same_pred(e, comp) && literal_args_unifiable(e, comp))
          throw std::logic_error("coinductive failure filter left a unifiable complement");
  }

  // Blocking choices for one CHS entry, argument positions first to last.
  std::vector<FilterCandidate> entry_candidates(const Literal& g, size_t entry_idx) {
    std::vector<FilterCandidate> out;
    std::set<std::string> seen;
    for (size_t i = 0; i < g.args.size(); ++i) {
      Term e = store_.deref(chs_[entry_idx].args[i]);
      Term t = store_.deref(g.args[i]);
      auto push = [&](FilterCandidate c) {
        c.key += std::to_string(i) + "|" + to_string(c.goal_arg) + "|" + to_string(c.value);
        if (seen.insert(c.key).second) out.push_back(std::move(c));
      };
      if (e.is_var() && store_.is_loopvar(e)) {
        // The even-loop exception: the CHS entry's loop variable is
        // constrained against the goal-side term, variables included.
        push({FilterCandidate::Kind::LoopvarConstrain, t, e, "L"});
      } else if (e.is_var()) {
        // Ground the goal argument to one of the entry's prohibited values.
        for (const Term& member : store_.prohibited(e))
          push({FilterCandidate::Kind::Bind, g.args[i], store_.resolve(member), "B"});
      } else {
        push({FilterCandidate::Kind::Disunify, g.args[i], e, "D"});
      }
    }
    return out;
  }

  bool entry_blocked(const Literal& g, size_t idx) {
    for (const Literal& comp : complements(g))
      if (same_pred(chs_[idx], comp) && literal_args_unifiable(chs_[idx], comp)) return false;
    return true;
  }

  // Entries are processed in CHS order; each still-unifiable entry
  // contributes one blocking constraint per alternative, and entries already
  // blocked by the accumulated constraints are skipped. An alternative whose
  // constraint set is a superset of an earlier one admits strictly fewer
  // groundings and is dropped; this keeps e.g. the three-way example at
  // exactly A=2, A=3, B=2.
  bool try_filter_alternatives(const Literal& g, const std::vector<size_t>& entries,
                               const Cont& proceed) {
    if (g.args.empty()) return false;
    std::vector<std::set<std::string>> yielded;
    std::set<std::string> sig;

    std::function<bool(size_t)> block_from = [&](size_t j) -> bool {
      while (j < entries.size() && entry_blocked(g, entries[j])) ++j;
      if (j == entries.size()) {
        for (const auto& y : yielded)
          if (std::includes(sig.begin(), sig.end(), y.begin(), y.end())) return false;
        assert_filter_postcondition(g);
        yielded.push_back(sig);
        return proceed();
      }
      auto with_candidate = [&](const FilterCandidate& cand, const Cont& applied) {
        auto it = sig.insert(cand.key);
        bool stop = false;
        if (it.second) {
          stop = applied();
          sig.erase(it.first);
        }
        return stop;
      };
      for (const FilterCandidate& cand : entry_candidates(g, entries[j])) {
        ++choicepoint_probes;
        switch (cand.kind) {
          case FilterCandidate::Kind::Bind: {
            Checkpoint cp = checkpoint();
            bool stop = false;
            if (constructive_unify(cand.goal_arg, cand.value, store_) &&
                entry_blocked(g, entries[j]))
              stop = with_candidate(cand, [&] { return block_from(j + 1); });
            if (stop) return true;
            restore(cp);
            break;
          }
          case FilterCandidate::Kind::LoopvarConstrain: {
            Checkpoint cp = checkpoint();
            store_.constrain(cand.value, cand.goal_arg);
            bool stop = false;
            if (entry_blocked(g, entries[j]))
              stop = with_candidate(cand, [&] { return block_from(j + 1); });
            if (stop) return true;
            restore(cp);
            break;
          }
          case FilterCandidate::Kind::Disunify: {
            bool stop = constructive_disunify(cand.goal_arg, cand.value, store_, [&] {
              if (!entry_blocked(g, entries[j])) return false;
              return with_candidate(cand, [&] { return block_from(j + 1); });
            });
            if (stop) return true;
            break;
          }
        }
      }
      return false;
    };
    return block_from(0);
  }

  // --- literal execution -----------------------------------------------------

  // Indented call trace on stderr, enabled by the SASP_TRACE environment
  // variable; useful when a derivation goes somewhere unexpected.
  static bool trace_enabled() {
    static bool on = getenv("SASP_TRACE") != nullptr;
    return on;
  }
  int trace_depth_ = 0;
  struct TraceGuard {
    Solver* s;
    TraceGuard(Solver* solver, const Literal& g) : s(solver) {
      if (trace_enabled()) {
        fprintf(stderr, "%*scall %s\n", s->trace_depth_ * 2, "",
                to_string(s->store_.resolve(g)).c_str());
        ++s->trace_depth_;
      }
    }
    ~TraceGuard() {
      if (trace_enabled()) --s->trace_depth_;
    }
  };

  bool exec_call(const Literal& g, int depth, const Cont& k) {
    ++stats.calls;
    TraceGuard trace(this, g);
    if (chs_.size() > stats.max_chs) stats.max_chs = chs_.size();
    // Deterministic CHS checks first: exact complement -> failure, exact
    // match -> success without narrowing.
    for (const Literal& comp : complements(g))
      for (const Literal& e : chs_)
        if (same_pred(e, comp) && is_exact_match(e, comp, store_)) return false;
    for (const Literal& e : chs_)
      if (same_pred(e, g) && is_exact_match(e, g, store_)) return k();

    std::vector<size_t> entries = unifiable_complement_entries(g);
    if (entries.empty()) return after_filter(g, depth, k);
    return try_filter_alternatives(g, entries, [&] { return after_filter(g, depth, k); });
  }

  // Collects variables of g still free after a coinductive match; they are
  // loop-variable candidates, committed when the ancestor finally succeeds.
  std::vector<VarId> free_vars_of(const Literal& g) {
    std::vector<VarId> ids;
    std::set<VarId> seen;
    for (const Term& a : g.args) {
      Term r = store_.resolve(a);
      collect_vars(r, ids, seen);
    }
    return ids;
  }

  bool after_filter(const Literal& g, int depth, const Cont& k) {
    // Call-stack scan, most recent first. Frames are addressed by index:
    // continuations may grow the stack vector and invalidate references.
    for (size_t fi = stack_.size(); fi-- > 0;) {
      if (!same_pred(stack_[fi].goal, g)) continue;
      int diff = depth - stack_[fi].neg_depth;
      bool exact = true;
      for (size_t a = 0; a < g.args.size() && exact; ++a)
        exact = is_exact_match(g.args[a], stack_[fi].goal.args[a], store_);
      if (exact) {
        if (diff == 0) return false;  // positive loop
        if (diff % 2 == 0) {
          // Deterministic coinductive success.
          size_t mark = stack_[fi].pending_loopvars.size();
          for (VarId v : free_vars_of(g)) stack_[fi].pending_loopvars.push_back(v);
          bool stop = k();
          if (!stop) stack_[fi].pending_loopvars.resize(mark);
          return stop;
        }
        continue;  // odd parity: the NMR machinery governs these
      }
      if (diff > 0 && diff % 2 == 0) {
        // Non-deterministic coinductive success: unify with the ancestor
        // (occurs check on), and fall through to normal execution on
        // backtracking.
        ++choicepoint_probes;
        Checkpoint cp = checkpoint();
        bool unified = true;
        try {
          for (size_t a = 0; a < g.args.size() && unified; ++a)
            unified = detail::unify_rec(g.args[a], stack_[fi].goal.args[a], store_, true);
        } catch (...) {
          restore(cp);
          throw;
        }
        if (unified) {
          size_t mark = stack_[fi].pending_loopvars.size();
          for (VarId v : free_vars_of(g)) stack_[fi].pending_loopvars.push_back(v);
          bool stop = k();
          if (stop) return true;
          stack_[fi].pending_loopvars.resize(mark);
        }
        restore(cp);
        // keep scanning older frames, then expand
      }
    }
    return expand(g, depth, k);
  }

  bool expand(const Literal& g, int depth, const Cont& k) {
    ++stats.expands;
    if (stack_.size() > stats.max_stack) stats.max_stack = stack_.size();
    if (cfg_.depth_limit && stack_.size() >= *cfg_.depth_limit) throw DepthLimitExceeded();

    const std::vector<const Clause*>* rules = tp_.rules(g.pred());
    if (!rules) {
      if (!g.naf) return false;  // unknown predicate: no way to prove it
      // Unknown predicate under NAF: vacuous dual.
      Checkpoint cp = checkpoint();
      bool stop = chs_insert(g) && k();
      if (!stop) restore(cp);
      return stop;
    }

    int inner_depth = depth + (g.naf ? 1 : 0);
    for (const Clause* c : *rules) {
      if (rules->size() > 1) ++choicepoint_probes;
      Checkpoint cp = checkpoint();
      Clause renamed = rename_clause(*c, gen_);
      bool head_ok = true;
      try {
        for (size_t a = 0; a < g.args.size() && head_ok; ++a)
          head_ok = detail::unify_rec(g.args[a], renamed.head->args[a], store_, true);
      } catch (...) {
        restore(cp);
        throw;
      }
      if (head_ok) {
        stack_.push_back(Frame{g, depth, {}});
        bool stop = exec_goals(renamed.body, 0, inner_depth, [&] {
          Frame fr = std::move(stack_.back());
          stack_.pop_back();
          Checkpoint cp2 = checkpoint();
          bool stop2 = false;
          if (chs_insert(g)) {
            for (VarId v : fr.pending_loopvars) store_.mark_loopvar(Term::var(v));
            stop2 = k();
          }
          if (!stop2) restore(cp2);
          stack_.push_back(std::move(fr));
          return stop2;
        });
        if (stop) return true;
        stack_.pop_back();
      }
      restore(cp);
    }
    return false;
  }

  // --- forall ---------------------------------------------------------------

  static const Literal& innermost_literal(const Goal& g) {
    if (g.kind == Goal::Kind::Forall) return innermost_literal(*g.quant_body);
    return g.call;
  }

  // A forall is a universally quantified fact: one proof suffices, so the
  // first complete proof commits the construct and the body's remaining
  // alternatives are cut. The commit lambda returns true to unwind the body
  // search while keeping the committed bindings, CHS entries and marks; the
  // frames pushed during the proof are truncated afterwards.
  bool exec_forall(const Term& v, const Goal& body, int depth, const Cont& k) {
    ++stats.foralls;
    bool proved = false;
    Checkpoint cp = checkpoint();
    size_t stack_size = stack_.size();

    exec_goal(body, depth, [&] {
      Term vd = store_.deref(v);
      if (!vd.is_var()) return false;  // bound: reject, backtrack within body

      std::vector<Term> values;
      for (const Term& t : store_.prohibited(vd)) values.push_back(store_.resolve(t));

      // Re-run the goal once per prohibited value, substituting the value
      // for the variable; all runs must succeed. Substitution goes by the
      // forall's own variable id: the store may have aliased it to a clause
      // variable, but the body's occurrences are syntactic.
      std::function<bool(size_t)> rerun = [&](size_t j) -> bool {
        if (j == values.size()) {
          // Having succeeded for all values, a loop variable reverts to an
          // ordinary negatively constrained variable.
          store_.unmark_loopvar(v);
          // Register the goal with the quantified variable unbound. The
          // entry gets a fresh variable: clearing the shared cell instead
          // would retroactively generalize every earlier CHS entry that
          // mentions it.
          Literal general = substitute(innermost_literal(body),
                                       {{v.var_id(), Term::var(gen_.fresh())}});
          if (!chs_insert(general)) return false;
          proved = true;
          return true;
        }
        Goal trial = substitute(body, {{v.var_id(), values[j]}});
        return exec_goal(trial, depth, [&] { return rerun(j + 1); });
      };
      return rerun(0);
    });

    if (!proved) return false;  // the body search failed and restored itself
    stack_.resize(stack_size);
    bool stop = k();
    if (!stop) restore(cp);
    return stop;
  }

  // --- loop variable domains --------------------------------------------------

  bool check_loop_variable_domains() {
    bool ok = true;
    store_.for_each_bound_loopvar([&](VarId, const BindingStore::Cell& c) {
      if (!ok) return;
      Term value = store_.resolve(c.value);
      for (const Term& e : c.prohibited)
        if (store_.resolve(e) == value) ok = false;
    });
    return ok;
  }

  // --- model snapshot ----------------------------------------------------------

  void collect_model_vars(const Term& t, PartialModel& pm) {
    if (t.is_var()) {
      const BindingStore::Cell* c = store_.cell(t.var_id());
      if (c && (c->kind == BindingStore::CellKind::LoopVar ||
                c->kind == BindingStore::CellKind::BoundLoop))
        pm.loopvars.insert(t.var_id());
      if (c && !c->prohibited.empty() && pm.constraints.find(t.var_id()) == pm.constraints.end()) {
        std::vector<Term> resolved;
        for (const Term& e : c->prohibited) resolved.push_back(store_.resolve(e));
        pm.constraints.emplace(t.var_id(), std::move(resolved));
      }
      return;
    }
    if (t.is_compound())
      for (const Term& a : t.args()) collect_model_vars(a, pm);
  }

  PartialModel snapshot(const std::vector<std::pair<std::string, Term>>& query_vars) {
    PartialModel pm;
    for (const Literal& e : chs_) {
      Literal r = store_.resolve(e);
      for (const Term& a : r.args) collect_model_vars(a, pm);
      pm.entries.push_back(std::move(r));
    }
    for (const auto& [name, term] : query_vars) {
      Term r = store_.resolve(term);
      collect_model_vars(r, pm);
      pm.bindings.emplace_back(name, std::move(r));
    }
    return pm;
  }

  const TransformedProgram& tp_;
  IdGen gen_;
  SolverConfig cfg_;
  BindingStore store_;
  std::vector<Frame> stack_;
  std::vector<Literal> chs_;
};

}  // namespace sasp
