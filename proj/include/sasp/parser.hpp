#pragma once

#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sasp/error.hpp"
#include "sasp/term.hpp"

namespace sasp {

struct ParseOptions {
  // Generated-program mode: accepts `not` heads, `$`-prefixed identifiers
  // and `$nis/2` goals so that dumped transformed programs reparse. Source
  // programs reject all three.
  bool generated = false;
};

struct ParsedQuery {
  std::vector<Goal> goals;
  // Named query variables in first-occurrence order, for answer printing.
  std::vector<std::pair<std::string, Term>> vars;
};

namespace detail {

enum class Tok {
  Atom, Var, Num, LParen, RParen, LBracket, RBracket, Comma, Bar, Dot,
  If,      // :-
  Query,   // ?-
  Eq, Neq, Lt, Gt, Geq, Leq, Plus, Minus, Star, Slash,
  End
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Rational num;
  int line = 1;
  int col = 1;
};

class Lexer {
public:
  Lexer(std::string_view src, bool generated) : src_(src), generated_(generated) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_ws();
      Token t;
      t.line = line_;
      t.col = col_;
      if (eof()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number(t);
      } else if (std::islower(static_cast<unsigned char>(c)) ||
                 (generated_ && c == '$')) {
        t.kind = Tok::Atom;
        t.text = lex_ident(true);
      } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Var;
        t.text = lex_ident(false);
      } else {
        lex_punct(t);
      }
      out.push_back(std::move(t));
    }
  }

private:
  bool eof() const { return pos_ >= src_.size(); }
  char peek(size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') { ++line_; col_ = 1; } else { ++col_; }
    return c;
  }

  void skip_ws() {
    for (;;) {
      while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) advance();
      if (!eof() && peek() == '%') {
        while (!eof() && peek() != '\n') advance();
        continue;
      }
      return;
    }
  }

  std::string lex_ident(bool atom) {
    std::string s;
    auto ident_char = [&](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
             (generated_ && atom && c == '$');
    };
    while (!eof() && ident_char(peek())) s.push_back(advance());
    return s;
  }

  void lex_number(Token& t) {
    std::string intpart, fracpart;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) intpart.push_back(advance());
    if (!eof() && peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      advance();
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) fracpart.push_back(advance());
    }
    t.kind = Tok::Num;
    t.num = Rational::from_decimal(intpart, fracpart);
  }

  void lex_punct(Token& t) {
    int line = line_, col = col_;
    char c = advance();
    switch (c) {
      case '(': t.kind = Tok::LParen; return;
      case ')': t.kind = Tok::RParen; return;
      case '[': t.kind = Tok::LBracket; return;
      case ']': t.kind = Tok::RBracket; return;
      case ',': t.kind = Tok::Comma; return;
      case '|': t.kind = Tok::Bar; return;
      case '.': t.kind = Tok::Dot; return;
      case '+': t.kind = Tok::Plus; return;
      case '*': t.kind = Tok::Star; return;
      case '/': t.kind = Tok::Slash; return;
      case '-': t.kind = Tok::Minus; return;
      case '=':
        if (!eof() && peek() == '<') { advance(); t.kind = Tok::Leq; return; }
        t.kind = Tok::Eq;
        return;
      case '<': t.kind = Tok::Lt; return;
      case '>':
        if (!eof() && peek() == '=') { advance(); t.kind = Tok::Geq; return; }
        t.kind = Tok::Gt;
        return;
      case '\\':
        if (!eof() && peek() == '=') { advance(); t.kind = Tok::Neq; return; }
        break;
      case ':':
        if (!eof() && peek() == '-') { advance(); t.kind = Tok::If; return; }
        break;
      case '?':
        if (!eof() && peek() == '-') { advance(); t.kind = Tok::Query; return; }
        break;
      default: break;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line, col);
  }

  std::string_view src_;
  bool generated_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

inline bool op_is_arith(const std::string& f) {
  return f == "+" || f == "-" || f == "*" || f == "/";
}

class Parser {
public:
  Parser(std::string_view src, IdGen& gen, ParseOptions opts)
      : toks_(Lexer(src, opts.generated).run()), gen_(gen), opts_(opts) {}

  Program program() {
    Program p;
    while (!at(Tok::End)) {
      clause_vars_.clear();
      p.add(clause());
    }
    return p;
  }

  ParsedQuery query() {
    clause_vars_.clear();
    query_vars_.clear();
    in_query_ = true;
    expect(Tok::Query, "expected '?-'");
    ParsedQuery q;
    q.goals = body();
    expect(Tok::Dot, "expected '.' at end of query");
    expect(Tok::End, "trailing input after query");
    if (q.goals.empty()) throw err("empty query");
    q.vars = std::move(query_vars_);
    return q;
  }

private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(size_t ahead = 1) const {
    size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_atom(const char* name) const { return at(Tok::Atom) && cur().text == name; }
  Token take() { return toks_[pos_++]; }
  void expect(Tok k, const char* msg) {
    if (!at(k)) throw err(msg);
    take();
  }
  ParseError err(const std::string& msg) const { return ParseError(msg, cur().line, cur().col); }

  Term var_term(const std::string& name) {
    if (name == "_") return Term::var(gen_.fresh(), "_");  // fresh identity per occurrence
    auto it = clause_vars_.find(name);
    if (it != clause_vars_.end()) return it->second;
    Term v = Term::var(gen_.fresh(), name);
    clause_vars_.emplace(name, v);
    if (in_query_) query_vars_.emplace_back(name, v);
    return v;
  }

  Clause clause() {
    Clause c;
    c.loc = {cur().line, cur().col};
    if (at(Tok::If)) {
      take();
      c.body = body();
    } else {
      c.head = head_literal();
      if (at(Tok::If)) {
        take();
        c.body = body();
      }
    }
    expect(Tok::Dot, "expected '.' at end of clause");
    return c;
  }

  Literal head_literal() {
    Literal l;
    if (at_atom("not")) {
      if (!opts_.generated) throw err("NAF-negated head is not allowed in source programs");
      take();
      l.naf = true;
    }
    if (at(Tok::Minus)) {
      take();
      l.classical = true;
    }
    if (!at(Tok::Atom)) throw err("expected predicate name in clause head");
    l.predicate = take().text;
    if (at(Tok::LParen)) l.args = paren_args();
    return l;
  }

  std::vector<Goal> body() {
    std::vector<Goal> goals;
    goals.push_back(goal());
    while (at(Tok::Comma)) {
      take();
      goals.push_back(goal());
    }
    return goals;
  }

  Goal goal() {
    if (at_atom("not")) {
      take();
      return Goal::literal(base_literal(true));
    }
    if (at_atom("forall") && peek().kind == Tok::LParen) {
      take();
      take();  // '('
      if (!at(Tok::Var)) throw err("expected variable as first argument of forall");
      Term v = var_term(take().text);
      expect(Tok::Comma, "expected ',' in forall");
      Goal inner = goal();
      expect(Tok::RParen, "expected ')' closing forall");
      return Goal::forall(v, std::move(inner));
    }
    if (at(Tok::Minus) && peek().kind == Tok::Atom) {
      return Goal::literal(base_literal(false));
    }
    Term t = expr();
    switch (cur().kind) {
      case Tok::Eq: take(); return Goal::builtin(BuiltinOp::Unify, t, expr());
      case Tok::Neq: take(); return Goal::builtin(BuiltinOp::Disunify, t, expr());
      case Tok::Lt: take(); return Goal::builtin(BuiltinOp::Less, t, expr());
      case Tok::Gt: take(); return Goal::builtin(BuiltinOp::Greater, t, expr());
      case Tok::Geq: take(); return Goal::builtin(BuiltinOp::Geq, t, expr());
      case Tok::Leq: take(); return Goal::builtin(BuiltinOp::Leq, t, expr());
      default: break;
    }
    if (at_atom("is")) {
      take();
      return Goal::builtin(BuiltinOp::Is, t, expr());
    }
    return term_to_goal(t);
  }

  Literal base_literal(bool naf) {
    Literal l;
    l.naf = naf;
    if (at(Tok::Minus)) {
      take();
      l.classical = true;
    }
    if (!at(Tok::Atom)) throw err("'not' must be applied to a literal");
    l.predicate = take().text;
    if (at(Tok::LParen)) l.args = paren_args();
    return l;
  }

  Goal term_to_goal(const Term& t) {
    if (t.is_const()) return Goal::literal(Literal{false, false, t.name(), {}});
    if (t.is_compound()) {
      const std::string& f = t.name();
      if (f == "$nis" && t.args().size() == 2)
        return Goal::builtin(BuiltinOp::NotIs, t.args()[0], t.args()[1]);
      if (detail::op_is_arith(f))
        throw err("arithmetic expression is not a valid goal");
      return Goal::literal(Literal{false, false, f, t.args()});
    }
    throw err("goal is not a literal");
  }

  std::vector<Term> paren_args() {
    expect(Tok::LParen, "expected '('");
    std::vector<Term> args;
    args.push_back(expr());
    while (at(Tok::Comma)) {
      take();
      args.push_back(expr());
    }
    expect(Tok::RParen, "expected ')'");
    return args;
  }

  Term expr() {  // additive level
    Term t = mul_expr();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      std::string op = at(Tok::Plus) ? "+" : "-";
      take();
      t = Term::compound(op, {t, mul_expr()});
    }
    return t;
  }

  Term mul_expr() {
    Term t = primary();
    while (at(Tok::Star) || at(Tok::Slash)) {
      std::string op = at(Tok::Star) ? "*" : "/";
      take();
      t = Term::compound(op, {t, primary()});
    }
    return t;
  }

  Term primary() {
    switch (cur().kind) {
      case Tok::Num:
        return Term::number(take().num);
      case Tok::Var:
        return var_term(take().text);
      case Tok::Minus: {
        take();
        if (at(Tok::Num)) return Term::number(-take().num);
        if (at(Tok::Var) || at(Tok::LParen))
          return Term::compound("-", {primary()});
        throw err("unexpected '-'");
      }
      case Tok::Atom: {
        std::string name = take().text;
        if (at(Tok::LParen)) return Term::compound(name, paren_args());
        return Term::constant(name);
      }
      case Tok::LParen: {
        take();
        Term t = expr();
        expect(Tok::RParen, "expected ')'");
        return t;
      }
      case Tok::LBracket:
        return list_term();
      default:
        throw err("expected a term");
    }
  }

  Term list_term() {
    expect(Tok::LBracket, "expected '['");
    if (at(Tok::RBracket)) {
      take();
      return Term::nil();
    }
    std::vector<Term> items;
    items.push_back(expr());
    while (at(Tok::Comma)) {
      take();
      items.push_back(expr());
    }
    Term tail = Term::nil();
    if (at(Tok::Bar)) {
      take();
      tail = expr();
    }
    expect(Tok::RBracket, "expected ']'");
    for (auto it = items.rbegin(); it != items.rend(); ++it) tail = Term::cons(*it, tail);
    return tail;
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
  IdGen& gen_;
  ParseOptions opts_;
  bool in_query_ = false;
  std::map<std::string, Term> clause_vars_;
  std::vector<std::pair<std::string, Term>> query_vars_;
};

}  // namespace detail

// Parses a program text. Source variables are renamed apart per clause by
// construction: every clause draws fresh identities from `gen`.
inline Program parse_program(std::string_view text, IdGen& gen, ParseOptions opts = {}) {
  return detail::Parser(text, gen, opts).program();
}

// Parses a `?- g1, ..., gn.` query, recording named variables for output.
inline ParsedQuery parse_query(std::string_view text, IdGen& gen, ParseOptions opts = {}) {
  return detail::Parser(text, gen, opts).query();
}

}  // namespace sasp
