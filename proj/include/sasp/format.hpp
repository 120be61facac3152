#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sasp/print.hpp"
#include "sasp/solver.hpp"
#include "sasp/transform.hpp"

namespace sasp {

struct ModelFormatOptions {
  bool show_internal = false;
};

namespace detail {

// Base display names shared by literals, constraint lists and binding
// lines: a variable reachable from a named query variable uses that name,
// anything else uses its hint or Var<id>.
inline std::map<VarId, std::string> base_names(const PartialModel& pm) {
  std::map<VarId, std::string> out;
  for (const auto& [name, t] : pm.bindings)
    if (t.is_var()) out.emplace(t.var_id(), name);
  return out;
}

// Query variables keep their source names, other variables print as
// Var<id>, loop variables carry a '?' prefix, and anonymous unconstrained
// variables collapse to '_'.
inline VarNamer model_namer(const PartialModel& pm,
                            const std::map<VarId, std::string>& names, bool mark_loops = true) {
  return [&pm, &names, mark_loops](const Term& v) -> std::string {
    auto named = names.find(v.var_id());
    bool has_name = named != names.end() || (!v.name().empty() && v.name() != "_");
    std::string base = named != names.end()
                           ? named->second
                           : (has_name ? v.name() : "Var" + std::to_string(v.var_id()));
    if (mark_loops && pm.loopvars.count(v.var_id())) return "?" + base;
    if (!pm.constraints.count(v.var_id()) && !has_name && !pm.loopvars.count(v.var_id()))
      return "_";
    return base;
  };
}

inline void collect_in_order(const Term& t, std::vector<VarId>& order, std::set<VarId>& seen) {
  if (!t.valid()) return;
  if (t.is_var()) {
    if (seen.insert(t.var_id()).second) order.push_back(t.var_id());
  } else if (t.is_compound()) {
    for (const Term& a : t.args()) collect_in_order(a, order, seen);
  }
}

}  // namespace detail

// `{ lit1, lit2, ... }` with positive literals before NAF-negated ones,
// lexicographic within each group. A literal where a constrained variable
// first appears is followed by the variable's prohibited values in
// parentheses, in insertion order.
inline std::string format_model(const PartialModel& pm, ModelFormatOptions opts = {}) {
  std::map<VarId, std::string> names = detail::base_names(pm);
  VarNamer namer = detail::model_namer(pm, names);
  VarNamer plain = detail::model_namer(pm, names, /*mark_loops=*/false);

  struct Item {
    std::string text;
    const Literal* lit;
  };
  std::vector<Item> items;
  for (const Literal& l : pm.entries) {
    if (!opts.show_internal && is_internal_predicate(l.predicate)) continue;
    items.push_back({to_string(l, namer), &l});
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.lit->naf != b.lit->naf) return !a.lit->naf;
    return a.text < b.text;
  });

  std::set<VarId> shown;
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const Item& item : items) {
    os << (first ? " " : ", ");
    first = false;
    os << item.text;
    // Constraints of variables making their first appearance here.
    std::vector<VarId> order;
    std::set<VarId> seen;
    for (const Term& a : item.lit->args) detail::collect_in_order(a, order, seen);
    std::string cons;
    for (VarId v : order) {
      if (shown.count(v)) continue;
      shown.insert(v);
      auto it = pm.constraints.find(v);
      if (it == pm.constraints.end() || it->second.empty()) continue;
      for (const Term& e : it->second) {
        if (!cons.empty()) cons += ", ";
        cons += plain(Term::var(v)) + " \\= " + to_string(e, namer);
      }
    }
    if (!cons.empty()) os << " ( " << cons << " )";
  }
  os << (first ? "" : " ") << "}";
  return os.str();
}

// One `Name = term` line per named query variable; constrained variables
// print their prohibited values instead, unbound ones print `Name = _`.
inline std::vector<std::string> format_bindings(const PartialModel& pm) {
  std::map<VarId, std::string> names = detail::base_names(pm);
  VarNamer namer = detail::model_namer(pm, names);
  std::vector<std::string> out;
  for (const auto& [name, t] : pm.bindings) {
    if (t.is_var()) {
      auto it = pm.constraints.find(t.var_id());
      if (it != pm.constraints.end() && !it->second.empty()) {
        std::string line;
        for (const Term& e : it->second) {
          if (!line.empty()) line += ", ";
          line += name + " \\= " + to_string(e, namer);
        }
        out.push_back(std::move(line));
        continue;
      }
      out.push_back(name + " = " + (pm.loopvars.count(t.var_id()) ? "?" + name : "_"));
      continue;
    }
    out.push_back(name + " = " + to_string(t, namer));
  }
  return out;
}

// The full transformed program in reparseable source syntax.
inline std::string format_transformed(const TransformedProgram& tp) {
  std::ostringstream os;
  os << "% abstracted program\n" << to_string(tp.originals());
  os << "\n% dual rules\n" << to_string(tp.duals());
  os << "\n% nmr check\n" << to_string(tp.checks());
  return os.str();
}

}  // namespace sasp
