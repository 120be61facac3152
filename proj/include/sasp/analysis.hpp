#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sasp/term.hpp"

namespace sasp {

// Weighted call graph: one node per positive literal identity, an edge per
// body-literal occurrence. Weight 0 for positive occurrences, 1 for
// NAF-negated ones. Arguments are ignored entirely.
struct CallGraph {
  struct Edge {
    PredRef from;
    PredRef to;
    int weight = 0;  // 0 positive, 1 negated
    int clause_id = -1;
  };

  std::set<PredRef> nodes;
  std::vector<Edge> edges;
};

inline void scan_goal_literals(const Goal& g, const std::function<void(const Literal&)>& fn) {
  switch (g.kind) {
    case Goal::Kind::Call: fn(g.call); break;
    case Goal::Kind::Forall: scan_goal_literals(*g.quant_body, fn); break;
    case Goal::Kind::Builtin: break;  // builtins are not call-graph nodes
  }
}

inline CallGraph build_call_graph(const Program& p) {
  CallGraph g;
  for (int c = 0; c < static_cast<int>(p.clauses.size()); ++c) {
    const Clause& cl = p.clauses[c];
    if (cl.head) g.nodes.insert(cl.head->positive_pred());
    for (const Goal& goal : cl.body) {
      scan_goal_literals(goal, [&](const Literal& lit) {
        PredRef to = lit.positive_pred();
        g.nodes.insert(to);
        if (cl.head)
          g.edges.push_back({cl.head->positive_pred(), to, lit.naf ? 1 : 0, c});
      });
    }
  }
  return g;
}

struct RuleClass {
  bool olon = false;
  bool ordinary = false;
};

struct RuleClassification {
  std::vector<RuleClass> by_clause;
};

namespace detail {

// Does some cycle through `e` carry odd total weight? Decided by
// reachability over (node, parity) pairs: start from (e.to, e.weight) and
// look for (e.from, odd).
inline bool edge_on_odd_cycle(const CallGraph::Edge& e,
                              const std::map<PredRef, std::vector<std::pair<PredRef, int>>>& adj) {
  std::set<std::pair<PredRef, int>> visited;
  std::vector<std::pair<PredRef, int>> queue{{e.to, e.weight % 2}};
  visited.insert(queue.front());
  while (!queue.empty()) {
    auto [node, parity] = queue.back();
    queue.pop_back();
    if (node == e.from && parity == 1) return true;
    auto it = adj.find(node);
    if (it == adj.end()) continue;
    for (const auto& [next, w] : it->second) {
      std::pair<PredRef, int> state{next, (parity + w) % 2};
      if (visited.insert(state).second) queue.push_back(state);
    }
  }
  return false;
}

}  // namespace detail

// Classifies clauses. A clause is an OLON rule iff it is headless or some
// cycle through one of its edges has odd weight; it is ordinary iff it has a
// head and at least one way through the graph avoiding all odd cycles.
inline RuleClassification detect_olon_rules(const CallGraph& g, const Program& p) {
  std::map<PredRef, std::vector<std::pair<PredRef, int>>> adj;
  for (const auto& e : g.edges) adj[e.from].emplace_back(e.to, e.weight);

  std::map<int, std::vector<const CallGraph::Edge*>> by_clause;
  for (const auto& e : g.edges) by_clause[e.clause_id].push_back(&e);

  RuleClassification rc;
  rc.by_clause.resize(p.clauses.size());
  for (int c = 0; c < static_cast<int>(p.clauses.size()); ++c) {
    RuleClass& r = rc.by_clause[c];
    if (!p.clauses[c].head) {
      r.olon = true;
      continue;
    }
    auto it = by_clause.find(c);
    if (it == by_clause.end()) {
      r.ordinary = true;  // fact or builtin-only body
      continue;
    }
    for (const CallGraph::Edge* e : it->second) {
      if (detail::edge_on_odd_cycle(*e, adj))
        r.olon = true;
      else
        r.ordinary = true;
    }
  }
  return rc;
}

struct Diagnostic {
  std::string message;
  SourceLoc loc;
};

// Best-effort static warnings; these never block execution.
inline std::vector<Diagnostic> check_legality(const Program& p) {
  std::vector<Diagnostic> out;

  // (a) arithmetic whose operands cannot be proven ground: a variable in an
  // arithmetic position with no occurrence in the head or any earlier goal.
  for (const Clause& cl : p.clauses) {
    std::set<VarId> seen;
    std::vector<VarId> tmp;
    std::set<VarId> tmpseen;
    if (cl.head)
      for (const Term& a : cl.head->args) collect_vars(a, tmp, tmpseen);
    seen.insert(tmpseen.begin(), tmpseen.end());

    for (const Goal& g : cl.body) {
      if (g.kind == Goal::Kind::Builtin) {
        bool comparison = g.op == BuiltinOp::Less || g.op == BuiltinOp::Greater ||
                          g.op == BuiltinOp::Geq || g.op == BuiltinOp::Leq;
        std::vector<VarId> operands;
        std::set<VarId> oseen;
        if (comparison) {
          collect_vars(g.lhs, operands, oseen);
          collect_vars(g.rhs, operands, oseen);
        } else if (g.op == BuiltinOp::Is || g.op == BuiltinOp::NotIs) {
          collect_vars(g.rhs, operands, oseen);
        }
        for (VarId v : operands) {
          if (!seen.count(v)) {
            out.push_back({"arithmetic operand may not be ground when executed", cl.loc});
            break;
          }
        }
      }
      std::vector<VarId> gv;
      std::set<VarId> gseen;
      collect_vars(g, gv, gseen);
      seen.insert(gseen.begin(), gseen.end());
    }
  }

  // (b) recursive predicates with no base-case clause: recursion can never
  // unify with an ancestor once every instance is fresh.
  for (const auto& [pred, clause_ids] : p.index) {
    bool all_recursive = !clause_ids.empty();
    for (int c : clause_ids) {
      bool recursive = false;
      for (const Goal& g : p.clauses[c].body)
        scan_goal_literals(g, [&](const Literal& lit) {
          if (!lit.naf && lit.positive_pred() == pred) recursive = true;
        });
      if (!recursive) { all_recursive = false; break; }
    }
    if (all_recursive)
      for (int c : clause_ids)
        out.push_back({"potential nontermination: every clause of " + pred.name + "/" +
                           std::to_string(pred.arity) + " is recursive with no base case",
                       p.clauses[c].loc});
  }

  // (c) heads whose abstraction introduces disunifications in the dual:
  // calling the dual with non-ground arguments is a runtime error class.
  std::set<PredRef> noted;
  for (const Clause& cl : p.clauses) {
    if (!cl.head) continue;
    std::set<VarId> seen;
    bool needs_eq = false;
    for (const Term& a : cl.head->args) {
      if (!a.is_var()) { needs_eq = true; break; }
      if (!seen.insert(a.var_id()).second) { needs_eq = true; break; }
    }
    if (needs_eq && noted.insert(cl.head->positive_pred()).second)
      out.push_back({"dual of " + cl.head->predicate + "/" +
                         std::to_string(cl.head->arity()) +
                         " disunifies against the head pattern; calling it with non-ground "
                         "arguments can raise an illegal-disunification error at runtime",
                     cl.loc});
  }

  return out;
}

}  // namespace sasp
