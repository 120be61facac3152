// Command-line front end: load programs, run queries interactively or in
// batch, dump the transformed program, and drive the reference oracle.

#include <unistd.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sasp/sasp.hpp"

namespace {

using namespace sasp;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SaspError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Session {
  IdGen gen;
  Program program;
  std::unique_ptr<TransformedProgram> tp;

  void load(const std::vector<std::string>& files, bool diagnostics) {
    for (const std::string& f : files) {
      Program part = parse_program(read_file(f), gen);
      for (Clause& c : part.clauses) program.add(std::move(c));
    }
    if (diagnostics)
      for (const Diagnostic& d : check_legality(program))
        std::cerr << "warning: " << d.message << " at " << d.loc.line << ":" << d.loc.col
                  << "\n";
    tp = std::make_unique<TransformedProgram>(transform(program, gen));
  }
};

std::string normalize_query(std::string line) {
  size_t b = line.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  size_t e = line.find_last_not_of(" \t\r\n");
  line = line.substr(b, e - b + 1);
  if (line.rfind("?-", 0) != 0) line = "?- " + line;
  if (line.back() != '.') line += ".";
  return line;
}

// Runs one query in batch mode: prints each model block and its bindings,
// up to max_models. Returns the number of models found.
int run_batch(Session& s, const std::string& query_text, int max_models, bool show_internal,
              SolverConfig cfg) {
  ParsedQuery q = parse_query(query_text, s.gen);
  Solver solver(*s.tp, s.gen, cfg);
  ModelFormatOptions fmt;
  fmt.show_internal = show_internal;
  int n = 0;
  solver.run(q.goals, q.vars, [&](const PartialModel& pm) {
    if (n) std::cout << "\n";
    std::cout << format_model(pm, fmt) << "\n";
    for (const std::string& line : format_bindings(pm)) std::cout << line << "\n";
    ++n;
    return max_models <= 0 || n < max_models;
  });
  if (n == 0) std::cout << "false.\n";
  return n;
}

int run_interactive(Session& s, bool show_internal, SolverConfig cfg) {
  bool tty = isatty(fileno(stdin));
  ModelFormatOptions fmt;
  fmt.show_internal = show_internal;
  std::string line;
  for (;;) {
    if (tty) std::cout << "?- " << std::flush;
    if (!std::getline(std::cin, line)) break;
    std::string text = normalize_query(line);
    if (text.empty()) continue;
    if (text == "?- halt.") break;
    try {
      ParsedQuery q = parse_query(text, s.gen);
      Solver solver(*s.tp, s.gen, cfg);
      bool any = false;
      Solver::Outcome outcome = solver.run(q.goals, q.vars, [&](const PartialModel& pm) {
        any = true;
        std::cout << format_model(pm, fmt) << "\n";
        std::vector<std::string> bindings = format_bindings(pm);
        for (size_t i = 0; i < bindings.size(); ++i)
          std::cout << bindings[i] << (i + 1 < bindings.size() ? "\n" : "");
        if (bindings.empty()) std::cout << "true";
        if (!tty) {
          std::cout << ".\n";
          return false;  // one model per piped query
        }
        std::cout << " " << std::flush;
        std::string resp;
        if (!std::getline(std::cin, resp)) return false;
        return !resp.empty() && resp[0] == ';';
      });
      if (outcome == Solver::Outcome::Exhausted) std::cout << "false.\n";
      (void)any;
    } catch (const ParseError& e) {
      std::cerr << "error: " << e.what() << "\n";
    } catch (const FatalError& e) {
      std::cerr << "fatal: " << e.what() << "\n";
    }
  }
  return 0;
}

std::vector<Term> parse_universe(const std::string& csv, IdGen& gen) {
  std::vector<Term> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    ParsedQuery q = parse_query("?- u(" + item + ").", gen);
    out.push_back(q.goals[0].call.args[0]);
  }
  return out;
}

int cmd_oracle(const std::string& file, const std::string& universe_csv, int extra, int bound) {
  IdGen gen;
  Program p = parse_program(read_file(file), gen);
  GroundOptions opts;
  opts.universe = parse_universe(universe_csv, gen);
  opts.extra_constants = extra;
  GroundProgram gp = ground(p, opts);
  std::vector<std::set<int>> models = enumerate_stable_models(gp, bound);
  for (const auto& m : models) {
    std::set<std::string> atoms;
    for (int a : m) atoms.insert(gp.atom_names[a]);
    std::cout << "{";
    bool first = true;
    for (const std::string& a : atoms) {
      std::cout << (first ? " " : ", ") << a;
      first = false;
    }
    std::cout << (first ? "" : " ") << "}\n";
  }
  if (models.empty()) std::cout << "false.\n";
  return 0;
}

int cmd_verify(const std::string& file, const std::string& query, const std::string& universe_csv,
               int extra, int max_models) {
  IdGen gen;
  Program p = parse_program(read_file(file), gen);
  TransformedProgram tp = transform(p, gen);
  ParsedQuery q = parse_query(normalize_query(query), gen);

  GroundOptions gopts;
  gopts.universe = parse_universe(universe_csv, gen);
  gopts.extra_constants = extra;
  GroundProgram gp = ground(p, gopts);
  std::vector<Term> universe = oracle_universe(p, gopts);

  Solver solver(tp, gen);
  int checked = 0;
  bool violated = false;
  solver.run(q.goals, q.vars, [&](const PartialModel& pm) {
    VerifyResult res = verify_partial_model(gp, pm, universe);
    ++checked;
    if (!res.ok) {
      std::cerr << "violation in model " << checked << ": " << res.witness << "\n";
      violated = true;
      return false;
    }
    return max_models <= 0 || checked < max_models;
  });
  std::cout << (violated ? "failed" : "verified") << " after " << checked << " model(s)\n";
  return violated ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"goal-directed stable model interpreter"};
  app.require_subcommand(0, 1);

  std::vector<std::string> files;
  std::string query;
  int max_models = 1;
  int depth = 0;
  bool dump = false;
  bool show_internal = false;
  bool diagnostics = false;
  bool oracle_flag = false;
  std::string verify_flag;

  app.add_option("files", files, "program files");
  app.add_option("-q,--query", query, "run one query in batch mode");
  app.add_option("-n,--max-models", max_models, "models per batch query (0 = all)");
  app.add_option("--depth", depth, "call-stack depth limit (0 = unbounded)");
  app.add_flag("--dump-transformed", dump, "print the transformed program and exit");
  app.add_flag("--show-internal", show_internal, "keep generated literals in printed models");
  app.add_flag("--diagnostics", diagnostics, "print static legality warnings");
  app.add_flag("--oracle", oracle_flag, "enumerate stable models of the grounding and exit");
  app.add_option("--verify", verify_flag, "run a query and check models against the oracle");

  std::string o_file, o_universe;
  int o_extra = 0, o_bound = 20;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "enumerate stable models of a grounding");
  oracle_cmd->add_option("file", o_file, "program file")->required();
  oracle_cmd->add_option("--universe", o_universe, "comma-separated grounding constants");
  oracle_cmd->add_option("--extra-constants", o_extra, "fresh constants beyond the program's");
  oracle_cmd->add_option("--atom-bound", o_bound, "enumeration bound on atom count");

  std::string v_file, v_query, v_universe;
  int v_extra = 1, v_max = 0;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "check solver models against the oracle");
  verify_cmd->add_option("file", v_file, "program file")->required();
  verify_cmd->add_option("-q,--query", v_query, "query to run")->required();
  verify_cmd->add_option("--universe", v_universe, "comma-separated grounding constants");
  verify_cmd->add_option("--extra-constants", v_extra, "fresh constants beyond the program's");
  verify_cmd->add_option("-n,--max-models", v_max, "models to check (0 = all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (oracle_cmd->parsed()) return cmd_oracle(o_file, o_universe, o_extra, o_bound);
    if (verify_cmd->parsed()) return cmd_verify(v_file, v_query, v_universe, v_extra, v_max);

    if (files.empty()) {
      std::cerr << "error: no program files\n";
      return 2;
    }
    if (oracle_flag) return cmd_oracle(files[0], "", 0, 20);
    if (!verify_flag.empty()) return cmd_verify(files[0], verify_flag, "", 1, 0);

    Session s;
    s.load(files, diagnostics);

    if (dump) {
      std::cout << format_transformed(*s.tp);
      return 0;
    }

    SolverConfig cfg;
    if (depth > 0) cfg.depth_limit = static_cast<size_t>(depth);

    if (!query.empty()) {
      int n = run_batch(s, normalize_query(query), max_models, show_internal, cfg);
      return n > 0 ? 0 : 1;
    }
    return run_interactive(s, show_internal, cfg);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FatalError& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 2;
  } catch (const SaspError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
