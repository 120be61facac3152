#pragma once

#include <functional>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sasp/error.hpp"
#include "sasp/print.hpp"
#include "sasp/term.hpp"

namespace sasp {

// Binding store over negatively constrained variables. A variable is either
// bound to a term or carries a prohibited value list (an unbound variable is
// the empty-list special case). Loop variables keep their list when bound so
// the final domain check can revisit it. All mutation goes through a trail;
// restoring a checkpoint returns the store to the exact prior state.
class BindingStore {
public:
  enum class CellKind { Constrained, LoopVar, Bound, BoundLoop };

  struct Cell {
    CellKind kind = CellKind::Constrained;
    Term value;                    // Bound / BoundLoop
    std::vector<Term> prohibited;  // Constrained / LoopVar / BoundLoop (stash)
  };

  using Checkpoint = size_t;

  const Cell* cell(VarId v) const {
    auto it = cells_.find(v);
    return it == cells_.end() ? nullptr : &it->second;
  }

  // Follows bound cells to a representative that is a non-variable or a
  // constrained (possibly loop) variable.
  Term deref(Term t) const {
    while (t.valid() && t.is_var()) {
      const Cell* c = cell(t.var_id());
      if (!c || (c->kind != CellKind::Bound && c->kind != CellKind::BoundLoop)) return t;
      t = c->value;
    }
    return t;
  }

  // Deep substitution of bound variables; free/constrained variables stay.
  Term resolve(Term t) const {
    t = deref(t);
    if (t.is_compound()) {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const Term& a : t.args()) args.push_back(resolve(a));
      return Term::compound(t.name(), std::move(args));
    }
    return t;
  }

  Literal resolve(const Literal& l) const {
    Literal out = l;
    for (Term& a : out.args) a = resolve(a);
    return out;
  }

  bool is_bound(const Term& t) const { return !deref(t).is_var(); }

  const std::vector<Term>& prohibited(const Term& v) const {
    static const std::vector<Term> kEmpty;
    Term d = deref(v);
    if (!d.is_var()) return kEmpty;
    const Cell* c = cell(d.var_id());
    return c ? c->prohibited : kEmpty;
  }

  bool is_loopvar(const Term& v) const {
    Term d = deref(v);
    if (!d.is_var()) return false;
    const Cell* c = cell(d.var_id());
    return c && c->kind == CellKind::LoopVar;
  }

  void set_cell(VarId v, Cell c) {
    auto it = cells_.find(v);
    if (it == cells_.end()) {
      trail_.emplace_back(v, std::nullopt);
      cells_.emplace(v, std::move(c));
    } else {
      trail_.emplace_back(v, it->second);
      it->second = std::move(c);
    }
  }

  Checkpoint checkpoint() const { return trail_.size(); }

  void restore(Checkpoint cp) {
    while (trail_.size() > cp) {
      auto& [v, old] = trail_.back();
      if (old)
        cells_[v] = std::move(*old);
      else
        cells_.erase(v);
      trail_.pop_back();
    }
  }

  size_t trail_depth() const { return trail_.size(); }

  // Appends a (resolved snapshot of a) value to a variable's prohibited
  // list; duplicates by structural equality are skipped. `v` must deref to a
  // variable.
  void constrain(const Term& v, const Term& value) {
    Term d = deref(v);
    Term entry = resolve(value);
    Cell c = cell_or_default(d.var_id());
    for (const Term& e : c.prohibited)
      if (resolve(e) == entry) return;
    c.prohibited.push_back(entry);
    set_cell(d.var_id(), std::move(c));
  }

  void mark_loopvar(const Term& v) {
    Term d = deref(v);
    if (!d.is_var()) return;
    Cell c = cell_or_default(d.var_id());
    if (c.kind == CellKind::Constrained) {
      c.kind = CellKind::LoopVar;
      set_cell(d.var_id(), std::move(c));
    }
  }

  void unmark_loopvar(const Term& v) {
    Term d = deref(v);
    if (!d.is_var()) return;
    Cell c = cell_or_default(d.var_id());
    if (c.kind == CellKind::LoopVar) {
      c.kind = CellKind::Constrained;
      set_cell(d.var_id(), std::move(c));
    }
  }

  // Clears a variable's prohibited list (forall success does this before
  // registering the goal in the CHS).
  void clear_prohibited(const Term& v) {
    Term d = deref(v);
    Cell c = cell_or_default(d.var_id());
    c.prohibited.clear();
    set_cell(d.var_id(), std::move(c));
  }

  // Enumerates every BoundLoop cell (a loop variable that was later bound)
  // together with its stashed list.
  template <typename Fn>
  void for_each_bound_loopvar(Fn&& fn) const {
    for (const auto& [v, c] : cells_)
      if (c.kind == CellKind::BoundLoop) fn(v, c);
  }

  Cell cell_or_default(VarId v) const {
    const Cell* c = cell(v);
    return c ? *c : Cell{};
  }

  // Deterministic snapshot of the whole store, for tests and debugging.
  std::string debug_dump() const {
    std::map<VarId, const Cell*> sorted;
    for (const auto& [v, c] : cells_) sorted.emplace(v, &c);
    std::string out;
    for (const auto& [v, c] : sorted) {
      out += "v" + std::to_string(v) + ":";
      switch (c->kind) {
        case CellKind::Constrained: out += "c"; break;
        case CellKind::LoopVar: out += "l"; break;
        case CellKind::Bound: out += "b=" + to_string(c->value); break;
        case CellKind::BoundLoop: out += "B=" + to_string(c->value); break;
      }
      for (const Term& e : c->prohibited) out += " \\=" + to_string(e);
      out += ";";
    }
    return out;
  }

private:
  std::unordered_map<VarId, Cell> cells_;
  std::vector<std::pair<VarId, std::optional<Cell>>> trail_;
};

// --- recursive structural tests ------------------------------------------

inline bool occurs_in(VarId v, const Term& t, const BindingStore& s) {
  Term d = s.deref(t);
  if (d.is_var()) return d.var_id() == v;
  if (d.is_compound())
    for (const Term& a : d.args())
      if (occurs_in(v, a, s)) return true;
  return false;
}

// True when the two terms can never denote the same value regardless of how
// remaining variables are narrowed.
inline bool definitely_different(const Term& a, const Term& b, const BindingStore& s) {
  Term x = s.deref(a), y = s.deref(b);
  if (x.is_var() || y.is_var()) return false;
  if (x.kind() != y.kind()) return true;
  switch (x.kind()) {
    case Term::Kind::Const: return x.name() != y.name();
    case Term::Kind::Num: return x.num() != y.num();
    case Term::Kind::Compound: {
      if (x.name() != y.name() || x.args().size() != y.args().size()) return true;
      for (size_t i = 0; i < x.args().size(); ++i)
        if (definitely_different(x.args()[i], y.args()[i], s)) return true;
      return false;
    }
    default: return false;
  }
}

inline bool definitely_equal(const Term& a, const Term& b, const BindingStore& s) {
  Term x = s.deref(a), y = s.deref(b);
  if (x.is_var() || y.is_var()) return x.is_var() && y.is_var() && x.var_id() == y.var_id();
  if (x.kind() != y.kind()) return false;
  switch (x.kind()) {
    case Term::Kind::Const: return x.name() == y.name();
    case Term::Kind::Num: return x.num() == y.num();
    case Term::Kind::Compound: {
      if (x.name() != y.name() || x.args().size() != y.args().size()) return false;
      for (size_t i = 0; i < x.args().size(); ++i)
        if (!definitely_equal(x.args()[i], y.args()[i], s)) return false;
      return true;
    }
    default: return false;
  }
}

namespace detail {

// Commits constraints so that `value != entry` holds now and under any
// later narrowing. Used when binding a constrained variable: each entry of
// its prohibited list must be kept apart from the incoming value. Takes the
// first viable route deterministically; a variable-to-variable comparison is
// the illegal case.
inline bool enforce_differs(const Term& value, const Term& entry, BindingStore& s) {
  Term t = s.deref(value), e = s.deref(entry);
  if (t.is_var() && e.is_var()) {
    if (t.var_id() == e.var_id()) return false;  // same variable: can never differ
    throw IllegalDisunification(to_string(t) + " vs " + to_string(e));
  }
  if (t.is_var()) {
    s.constrain(t, e);
    return true;
  }
  if (e.is_var()) {
    s.constrain(e, t);
    return true;
  }
  if (definitely_different(t, e, s)) return true;
  if (t.kind() != e.kind()) return true;
  switch (t.kind()) {
    case Term::Kind::Const:
    case Term::Kind::Num:
      return false;  // equal atomic values
    case Term::Kind::Compound: {
      // Same functor/arity and no definitely-different pair: push the
      // disequality into the first pair that still has slack.
      for (size_t i = 0; i < t.args().size(); ++i)
        if (!definitely_equal(t.args()[i], e.args()[i], s))
          return enforce_differs(t.args()[i], e.args()[i], s);
      return false;  // structurally identical
    }
    default: return false;
  }
}

inline bool unify_rec(const Term& a, const Term& b, BindingStore& s, bool occurs);

inline bool bind_var(const Term& var, const Term& value, BindingStore& s, bool occurs) {
  if (occurs && occurs_in(var.var_id(), value, s)) return false;
  BindingStore::Cell old = s.cell_or_default(var.var_id());
  for (const Term& e : old.prohibited)
    if (!enforce_differs(value, e, s)) return false;
  BindingStore::Cell c;
  if (old.kind == BindingStore::CellKind::LoopVar) {
    c.kind = BindingStore::CellKind::BoundLoop;
    c.prohibited = old.prohibited;  // stash for the final domain check
  } else {
    c.kind = BindingStore::CellKind::Bound;
  }
  c.value = value;
  s.set_cell(var.var_id(), std::move(c));
  return true;
}

inline bool merge_vars(const Term& a, const Term& b, BindingStore& s) {
  // Shared cell on b with the union of both prohibited lists.
  BindingStore::Cell ca = s.cell_or_default(a.var_id());
  BindingStore::Cell cb = s.cell_or_default(b.var_id());
  BindingStore::Cell merged;
  merged.kind = (ca.kind == BindingStore::CellKind::LoopVar ||
                 cb.kind == BindingStore::CellKind::LoopVar)
                    ? BindingStore::CellKind::LoopVar
                    : BindingStore::CellKind::Constrained;
  merged.prohibited = cb.prohibited;
  s.set_cell(b.var_id(), std::move(merged));
  for (const Term& e : ca.prohibited) s.constrain(b, e);

  BindingStore::Cell link;
  link.kind = ca.kind == BindingStore::CellKind::LoopVar ? BindingStore::CellKind::BoundLoop
                                                         : BindingStore::CellKind::Bound;
  link.value = b;
  if (link.kind == BindingStore::CellKind::BoundLoop) link.prohibited = ca.prohibited;
  s.set_cell(a.var_id(), std::move(link));
  return true;
}

inline bool unify_rec(const Term& a, const Term& b, BindingStore& s, bool occurs) {
  Term x = s.deref(a), y = s.deref(b);
  if (x.is_var() && y.is_var()) {
    if (x.var_id() == y.var_id()) return true;
    return merge_vars(x, y, s);
  }
  if (x.is_var()) return bind_var(x, y, s, occurs);
  if (y.is_var()) return bind_var(y, x, s, occurs);
  if (x.kind() != y.kind()) return false;
  switch (x.kind()) {
    case Term::Kind::Const: return x.name() == y.name();
    case Term::Kind::Num: return x.num() == y.num();
    case Term::Kind::Compound: {
      if (x.name() != y.name() || x.args().size() != y.args().size()) return false;
      for (size_t i = 0; i < x.args().size(); ++i)
        if (!unify_rec(x.args()[i], y.args()[i], s, occurs)) return false;
      return true;
    }
    default: return false;
  }
}

}  // namespace detail

// Constructive unification. On success the union/binding is committed via
// the trail; on failure the store is unchanged. May raise
// IllegalDisunification when keeping a prohibited entry apart would require
// disunifying two negatively constrained variables.
inline bool constructive_unify(const Term& a, const Term& b, BindingStore& s,
                               bool occurs = true) {
  BindingStore::Checkpoint cp = s.checkpoint();
  bool ok = false;
  try {
    ok = detail::unify_rec(a, b, s, occurs);
  } catch (...) {
    s.restore(cp);
    throw;
  }
  if (!ok) s.restore(cp);
  return ok;
}

// Non-mutating unifiability probe.
inline bool unifiable(const Term& a, const Term& b, BindingStore& s, bool occurs = true) {
  BindingStore::Checkpoint cp = s.checkpoint();
  bool ok = false;
  try {
    ok = detail::unify_rec(a, b, s, occurs);
  } catch (...) {
    s.restore(cp);
    throw;
  }
  s.restore(cp);
  return ok;
}

// Constructive disunification. Deterministic cases call `k` once; compound
// disunification yields one alternative per argument pair, first to last,
// invoking `k` with the constraint applied and undoing it afterwards.
// Returns true as soon as `k` returns true (search cut-through).
inline bool constructive_disunify(const Term& a, const Term& b, BindingStore& s,
                                  const std::function<bool()>& k) {
  Term x = s.deref(a), y = s.deref(b);
  if (x.is_var() && y.is_var()) {
    if (x.var_id() == y.var_id()) return false;
    throw IllegalDisunification(to_string(x) + " vs " + to_string(y));
  }
  if (x.is_var() || y.is_var()) {
    const Term& var = x.is_var() ? x : y;
    const Term& val = x.is_var() ? y : x;
    BindingStore::Checkpoint cp = s.checkpoint();
    s.constrain(var, val);
    if (k()) return true;
    s.restore(cp);
    return false;
  }
  if (definitely_different(x, y, s)) return k();
  if (x.kind() != y.kind()) return k();
  if (x.is_const() || x.is_num()) return false;  // equal atomics
  if (x.name() != y.name() || x.args().size() != y.args().size()) return k();
  for (size_t i = 0; i < x.args().size(); ++i) {
    if (definitely_equal(x.args()[i], y.args()[i], s)) continue;
    if (constructive_disunify(x.args()[i], y.args()[i], s, k)) return true;
  }
  return false;
}

// True iff constructive unification would succeed without altering any
// prohibited value list and without narrowing any variable.
inline bool is_exact_match(const Term& a, const Term& b, const BindingStore& s) {
  Term x = s.deref(a), y = s.deref(b);
  if (x.is_var() && y.is_var()) {
    if (x.var_id() == y.var_id()) return true;
    const auto& la = s.prohibited(x);
    const auto& lb = s.prohibited(y);
    if (la.size() != lb.size()) return false;
    // Set equality of resolved entries (lists are deduplicated).
    for (const Term& ea : la) {
      bool found = false;
      for (const Term& eb : lb)
        if (s.resolve(ea) == s.resolve(eb)) { found = true; break; }
      if (!found) return false;
    }
    return true;
  }
  if (x.is_var() || y.is_var()) return false;
  if (x.kind() != y.kind()) return false;
  switch (x.kind()) {
    case Term::Kind::Const: return x.name() == y.name();
    case Term::Kind::Num: return x.num() == y.num();
    case Term::Kind::Compound: {
      if (x.name() != y.name() || x.args().size() != y.args().size()) return false;
      for (size_t i = 0; i < x.args().size(); ++i)
        if (!is_exact_match(x.args()[i], y.args()[i], s)) return false;
      return true;
    }
    default: return false;
  }
}

inline bool is_exact_match(const Literal& a, const Literal& b, const BindingStore& s) {
  if (a.naf != b.naf || a.classical != b.classical || a.predicate != b.predicate ||
      a.args.size() != b.args.size())
    return false;
  for (size_t i = 0; i < a.args.size(); ++i)
    if (!is_exact_match(a.args[i], b.args[i], s)) return false;
  return true;
}

}  // namespace sasp
