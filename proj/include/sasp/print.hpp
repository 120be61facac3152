#pragma once

#include <functional>
#include <sstream>
#include <string>

#include "sasp/term.hpp"

namespace sasp {

// Names a variable for display. The default falls back to the parser's
// name hint or Var<id> for generated identities.
using VarNamer = std::function<std::string(const Term&)>;

inline std::string default_var_name(const Term& v) {
  if (!v.name().empty()) return v.name();
  return "Var" + std::to_string(v.var_id());
}

namespace detail {

inline int op_prec(const std::string& f, int arity) {
  if (arity == 2) {
    if (f == "+" || f == "-") return 500;
    if (f == "*" || f == "/") return 400;
  }
  if (arity == 1 && f == "-") return 200;
  return 0;
}

inline void print_term_rec(std::ostream& os, const Term& t, int max_prec, const VarNamer& namer) {
  if (!t.valid()) {
    os << "<invalid>";
    return;
  }
  switch (t.kind()) {
    case Term::Kind::Var:
      os << namer(t);
      return;
    case Term::Kind::Const:
      os << t.name();
      return;
    case Term::Kind::Num:
      os << t.num().to_string();
      return;
    case Term::Kind::Compound: {
      if (t.name() == "." && t.args().size() == 2) {
        os << '[';
        print_term_rec(os, t.args()[0], 999, namer);
        Term tail = t.args()[1];
        while (tail.is_compound() && tail.name() == "." && tail.args().size() == 2) {
          os << ',';
          print_term_rec(os, tail.args()[0], 999, namer);
          tail = tail.args()[1];
        }
        if (!(tail.is_const() && tail.name() == "[]")) {
          os << '|';
          print_term_rec(os, tail, 999, namer);
        }
        os << ']';
        return;
      }
      int prec = op_prec(t.name(), static_cast<int>(t.args().size()));
      if (prec > 0 && t.args().size() == 2) {
        bool paren = prec > max_prec;
        if (paren) os << '(';
        // Left associative operators: the left side may carry the same
        // precedence, the right side must bind tighter.
        print_term_rec(os, t.args()[0], prec, namer);
        os << ' ' << t.name() << ' ';
        print_term_rec(os, t.args()[1], prec - 1, namer);
        if (paren) os << ')';
        return;
      }
      if (prec > 0 && t.args().size() == 1) {
        bool paren = prec > max_prec;
        if (paren) os << '(';
        os << t.name();
        print_term_rec(os, t.args()[0], prec, namer);
        if (paren) os << ')';
        return;
      }
      os << t.name() << '(';
      for (size_t i = 0; i < t.args().size(); ++i) {
        if (i) os << ',';
        print_term_rec(os, t.args()[i], 999, namer);
      }
      os << ')';
      return;
    }
  }
}

}  // namespace detail

inline std::string to_string(const Term& t, const VarNamer& namer = default_var_name) {
  std::ostringstream os;
  detail::print_term_rec(os, t, 999, namer);
  return os.str();
}

inline std::string to_string(const Literal& l, const VarNamer& namer = default_var_name) {
  std::ostringstream os;
  if (l.naf) os << "not ";
  if (l.classical) os << '-';
  os << l.predicate;
  if (!l.args.empty()) {
    os << '(';
    for (size_t i = 0; i < l.args.size(); ++i) {
      if (i) os << ',';
      detail::print_term_rec(os, l.args[i], 999, namer);
    }
    os << ')';
  }
  return os.str();
}

inline const char* builtin_symbol(BuiltinOp op) {
  switch (op) {
    case BuiltinOp::Unify: return "=";
    case BuiltinOp::Disunify: return "\\=";
    case BuiltinOp::Less: return "<";
    case BuiltinOp::Greater: return ">";
    case BuiltinOp::Geq: return ">=";
    case BuiltinOp::Leq: return "=<";
    case BuiltinOp::Is: return "is";
    case BuiltinOp::NotIs: return "$nis";
  }
  return "?";
}

inline std::string to_string(const Goal& g, const VarNamer& namer = default_var_name) {
  switch (g.kind) {
    case Goal::Kind::Call:
      return to_string(g.call, namer);
    case Goal::Kind::Builtin: {
      std::ostringstream os;
      if (g.op == BuiltinOp::NotIs) {
        // Generated complement of `is`; printed functionally so transformed
        // programs stay reparseable.
        os << "$nis(" << to_string(g.lhs, namer) << ',' << to_string(g.rhs, namer) << ')';
      } else {
        os << to_string(g.lhs, namer) << ' ' << builtin_symbol(g.op) << ' '
           << to_string(g.rhs, namer);
      }
      return os.str();
    }
    case Goal::Kind::Forall: {
      std::ostringstream os;
      os << "forall(" << namer(g.quant_var) << ',' << to_string(*g.quant_body, namer) << ')';
      return os.str();
    }
  }
  return {};
}

inline std::string to_string(const Clause& c, const VarNamer& namer = default_var_name) {
  std::ostringstream os;
  if (c.head) os << to_string(*c.head, namer);
  if (!c.body.empty() || !c.head) {
    os << (c.head ? " :- " : ":- ");
    for (size_t i = 0; i < c.body.size(); ++i) {
      if (i) os << ", ";
      os << to_string(c.body[i], namer);
    }
  }
  os << '.';
  return os.str();
}

inline std::string to_string(const Program& p, const VarNamer& namer = default_var_name) {
  std::ostringstream os;
  for (const Clause& c : p.clauses) os << to_string(c, namer) << '\n';
  return os.str();
}

}  // namespace sasp
