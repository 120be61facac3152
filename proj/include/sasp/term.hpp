#pragma once

#include <cassert>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sasp/rational.hpp"

namespace sasp {

using VarId = std::int64_t;

// Hands out globally unique variable identities. One generator is threaded
// through parse -> transform -> solve so renamed clauses never collide.
struct IdGen {
  VarId next = 1;
  VarId fresh() { return next++; }
};

// Immutable term: variable, constant, exact number, or compound. Copies are
// cheap handle copies; structural operations build new terms.
class Term {
public:
  enum class Kind { Var, Const, Num, Compound };

  Term() = default;

  static Term var(VarId id, std::string name = {}) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Var;
    n->id = id;
    n->name = std::move(name);
    return Term(std::move(n));
  }
  static Term constant(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->name = std::move(name);
    return Term(std::move(n));
  }
  static Term number(Rational v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Num;
    n->num = v;
    return Term(std::move(n));
  }
  static Term compound(std::string functor, std::vector<Term> args) {
    assert(!args.empty());
    auto n = std::make_shared<Node>();
    n->kind = Kind::Compound;
    n->name = std::move(functor);
    n->args = std::move(args);
    return Term(std::move(n));
  }
  static Term nil() { return constant("[]"); }
  static Term cons(Term head, Term tail) {
    return compound(".", {std::move(head), std::move(tail)});
  }

  bool valid() const { return node_ != nullptr; }
  Kind kind() const { return node_->kind; }
  bool is_var() const { return node_->kind == Kind::Var; }
  bool is_const() const { return node_->kind == Kind::Const; }
  bool is_num() const { return node_->kind == Kind::Num; }
  bool is_compound() const { return node_->kind == Kind::Compound; }

  VarId var_id() const { assert(is_var()); return node_->id; }
  // Constant name, functor, or variable name hint depending on kind.
  const std::string& name() const { return node_->name; }
  const Rational& num() const { assert(is_num()); return node_->num; }
  const std::vector<Term>& args() const { return node_->args; }
  int arity() const { return is_compound() ? static_cast<int>(node_->args.size()) : 0; }

  // Structural equality; variables compare by identity, name hints ignored.
  friend bool operator==(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return true;
    if (!a.node_ || !b.node_ || a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Kind::Var: return a.var_id() == b.var_id();
      case Kind::Const: return a.name() == b.name();
      case Kind::Num: return a.num() == b.num();
      case Kind::Compound: {
        if (a.name() != b.name() || a.args().size() != b.args().size()) return false;
        for (size_t i = 0; i < a.args().size(); ++i)
          if (!(a.args()[i] == b.args()[i])) return false;
        return true;
      }
    }
    return false;
  }
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

private:
  struct Node {
    Kind kind = Kind::Const;
    VarId id = 0;
    std::string name;
    Rational num;
    std::vector<Term> args;
  };
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Predicate identity: classical flag, symbol and arity all distinguish
// predicates; the naf flag extends the same key to rule sets for negated
// literals (dual rules).
struct PredRef {
  bool naf = false;
  bool classical = false;
  std::string name;
  int arity = 0;

  friend auto operator<=>(const PredRef&, const PredRef&) = default;
};

struct Literal {
  bool naf = false;        // `not` prefix
  bool classical = false;  // `-` prefix
  std::string predicate;
  std::vector<Term> args;

  int arity() const { return static_cast<int>(args.size()); }
  PredRef pred() const { return PredRef{naf, classical, predicate, arity()}; }
  PredRef positive_pred() const { return PredRef{false, classical, predicate, arity()}; }
  Literal negated() const {
    Literal l = *this;
    l.naf = !l.naf;
    return l;
  }
};

enum class BuiltinOp { Unify, Disunify, Less, Greater, Geq, Leq, Is, NotIs };

// A body goal: a literal call, a builtin, or a (generated) forall wrapper.
struct Goal {
  enum class Kind { Call, Builtin, Forall };

  Kind kind = Kind::Call;
  Literal call;                          // Kind::Call
  BuiltinOp op = BuiltinOp::Unify;       // Kind::Builtin
  Term lhs, rhs;                         // Kind::Builtin
  Term quant_var;                        // Kind::Forall
  std::shared_ptr<const Goal> quant_body;

  static Goal literal(Literal l) {
    Goal g;
    g.kind = Kind::Call;
    g.call = std::move(l);
    return g;
  }
  static Goal builtin(BuiltinOp op, Term a, Term b) {
    Goal g;
    g.kind = Kind::Builtin;
    g.op = op;
    g.lhs = std::move(a);
    g.rhs = std::move(b);
    return g;
  }
  static Goal forall(Term v, Goal body) {
    assert(v.is_var());
    Goal g;
    g.kind = Kind::Forall;
    g.quant_var = std::move(v);
    g.quant_body = std::make_shared<Goal>(std::move(body));
    return g;
  }
};

struct SourceLoc {
  int line = 0;
  int col = 0;
};

struct Clause {
  std::optional<Literal> head;  // absent for headless rules
  std::vector<Goal> body;
  SourceLoc loc;
};

struct Program {
  std::vector<Clause> clauses;
  // Head predicate -> clause indices in source order.
  std::map<PredRef, std::vector<int>> index;

  void add(Clause c) {
    int id = static_cast<int>(clauses.size());
    if (c.head) index[c.head->pred()].push_back(id);
    clauses.push_back(std::move(c));
  }
  void reindex() {
    index.clear();
    for (int i = 0; i < static_cast<int>(clauses.size()); ++i)
      if (clauses[i].head) index[clauses[i].head->pred()].push_back(i);
  }
};

// --- variable walking helpers ------------------------------------------

inline void collect_vars(const Term& t, std::vector<VarId>& out, std::set<VarId>& seen) {
  if (!t.valid()) return;
  if (t.is_var()) {
    if (seen.insert(t.var_id()).second) out.push_back(t.var_id());
  } else if (t.is_compound()) {
    for (const Term& a : t.args()) collect_vars(a, out, seen);
  }
}

inline void collect_vars(const Goal& g, std::vector<VarId>& out, std::set<VarId>& seen) {
  switch (g.kind) {
    case Goal::Kind::Call:
      for (const Term& a : g.call.args) collect_vars(a, out, seen);
      break;
    case Goal::Kind::Builtin:
      collect_vars(g.lhs, out, seen);
      collect_vars(g.rhs, out, seen);
      break;
    case Goal::Kind::Forall:
      collect_vars(g.quant_var, out, seen);
      collect_vars(*g.quant_body, out, seen);
      break;
  }
}

// Variables of a clause in first-occurrence order (head first, then body).
inline std::vector<VarId> clause_vars(const Clause& c) {
  std::vector<VarId> out;
  std::set<VarId> seen;
  if (c.head)
    for (const Term& a : c.head->args) collect_vars(a, out, seen);
  for (const Goal& g : c.body) collect_vars(g, out, seen);
  return out;
}

// --- substitution and renaming ------------------------------------------

inline Term substitute(const Term& t, const std::map<VarId, Term>& sub) {
  if (!t.valid()) return t;
  switch (t.kind()) {
    case Term::Kind::Var: {
      auto it = sub.find(t.var_id());
      return it == sub.end() ? t : it->second;
    }
    case Term::Kind::Compound: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const Term& a : t.args()) args.push_back(substitute(a, sub));
      return Term::compound(t.name(), std::move(args));
    }
    default:
      return t;
  }
}

inline Literal substitute(const Literal& l, const std::map<VarId, Term>& sub) {
  Literal out = l;
  for (Term& a : out.args) a = substitute(a, sub);
  return out;
}

inline Goal substitute(const Goal& g, const std::map<VarId, Term>& sub) {
  Goal out = g;
  switch (g.kind) {
    case Goal::Kind::Call:
      out.call = substitute(g.call, sub);
      break;
    case Goal::Kind::Builtin:
      out.lhs = substitute(g.lhs, sub);
      out.rhs = substitute(g.rhs, sub);
      break;
    case Goal::Kind::Forall:
      out.quant_var = substitute(g.quant_var, sub);
      out.quant_body = std::make_shared<Goal>(substitute(*g.quant_body, sub));
      break;
  }
  return out;
}

// Returns a structurally identical clause whose variables all carry fresh
// identities; co-references are preserved, name hints dropped.
inline Clause rename_clause(const Clause& c, IdGen& gen) {
  std::map<VarId, Term> sub;
  for (VarId v : clause_vars(c)) sub.emplace(v, Term::var(gen.fresh()));
  Clause out;
  out.loc = c.loc;
  if (c.head) out.head = substitute(*c.head, sub);
  out.body.reserve(c.body.size());
  for (const Goal& g : c.body) out.body.push_back(substitute(g, sub));
  return out;
}

}  // namespace sasp
