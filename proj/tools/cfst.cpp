// cfst: check, run and inspect programs with context-free session types.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "cfst/dual.hpp"
#include "cfst/equiv.hpp"
#include "cfst/grammar.hpp"
#include "cfst/pretty.hpp"
#include "cfst/runtime.hpp"
#include "cfst/syntax.hpp"
#include "cfst/typecheck.hpp"

namespace {

using namespace cfst;

enum Exit { kOk = 0, kFail = 1, kInconclusive = 2, kDeadlock = 3, kUsage = 64 };

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void report(const std::string& file, const Diagnostics& diags) {
  for (const auto& d : diags) std::cerr << format_diagnostic(file, d) << '\n';
}

// Parses and checks `path`; prints diagnostics and returns nullopt on failure.
std::optional<Program> load(const std::string& path, const EquivOptions& eq) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << "cfst: cannot read " << path << '\n';
    return std::nullopt;
  }
  ParseResult parsed = parse_program(*text);
  if (!parsed.program) {
    report(path, parsed.diagnostics);
    return std::nullopt;
  }
  Diagnostics diags = check_program(*parsed.program, eq);
  if (!diags.empty()) {
    report(path, diags);
    return std::nullopt;
  }
  return std::move(parsed.program);
}

struct TypeContext {
  std::map<std::string, TypePtr> abbrevs;
  DataKinds data;
};

// A command-line type: abbreviations from an optional file are expanded and
// free variables are treated as linear session variables.
std::pair<TypePtr, KindEnv> load_type(const std::string& text, const TypeContext& ctx) {
  TypePtr t = resolve(parse_type(text), ctx.abbrevs);
  KindEnv env;
  for (const auto& v : free_vars(t)) env[v] = Kind::sl();
  synth_kind(env, t, ctx.data);
  return {t, env};
}

int print_types(const std::string& path, const EquivOptions& eq) {
  auto p = load(path, eq);
  if (!p) return kFail;
  Diagnostics diags;
  auto env = build_global_env(*p, diags);
  for (const auto& s : p->signatures) std::cout << s.name << " : " << pretty(env->schemes.at(s.name)) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Type checker and interpreter for context-free session types"};
  app.require_subcommand(1);

  std::string file, type1, type2, context_file;
  bool dump_types = false, trace = false, no_prioritize = false;
  std::size_t budget = EquivOptions{}.budget;
  std::optional<std::uint64_t> seed;
  long quiescence_ms = 2000;
  std::string simplify = "fixed";

  auto add_budget = [&](CLI::App* c) {
    c->add_option("--budget", budget, "Node budget for type equivalence")->check(CLI::PositiveNumber);
  };

  auto* check = app.add_subcommand("check", "Type check a program");
  check->add_option("file", file)->required();
  check->add_flag("--dump-types", dump_types, "Print each top-level name with its scheme");
  add_budget(check);

  auto* run = app.add_subcommand("run", "Check and run a program, printing main");
  run->add_option("file", file)->required();
  run->add_option("--seed", seed, "Randomize thread interleaving with this seed");
  run->add_option("--quiescence-ms", quiescence_ms, "Deadlock watchdog interval")
      ->check(CLI::PositiveNumber);
  add_budget(run);

  auto* equiv = app.add_subcommand("equiv", "Decide equivalence of two types");
  equiv->add_option("type1", type1)->required();
  equiv->add_option("type2", type2)->required();
  equiv->add_option("--file", context_file, "Take type abbreviations from a program");
  equiv->add_flag("--trace", trace, "Print one line per processed node");
  equiv->add_flag("--no-prioritize", no_prioritize, "Plain breadth-first order");
  equiv->add_option("--simplify", simplify, "Simplification mode")
      ->check(CLI::IsMember({"fixed", "single", "off"}));
  add_budget(equiv);

  auto* dual_cmd = app.add_subcommand("dual", "Print the dual of a session type");
  dual_cmd->add_option("type", type1)->required();
  dual_cmd->add_option("--file", context_file, "Take type abbreviations from a program");

  auto* grammar_cmd = app.add_subcommand("dump-grammar", "Print the grammar of a session type");
  grammar_cmd->add_option("type", type1)->required();
  grammar_cmd->add_option("--file", context_file, "Take type abbreviations from a program");

  auto* types_cmd = app.add_subcommand("dump-types", "Print each top-level name with its scheme");
  types_cmd->add_option("file", file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  EquivOptions eq;
  eq.budget = budget;
  eq.prioritize = !no_prioritize;
  eq.simplification = simplify == "single" ? Simplification::SinglePass
                      : simplify == "off"  ? Simplification::Off
                                           : Simplification::FixedPoint;

  if (check->parsed() || types_cmd->parsed()) {
    if (dump_types || types_cmd->parsed()) return print_types(file, eq);
    return load(file, eq) ? kOk : kFail;
  }

  if (run->parsed()) {
    auto p = load(file, eq);
    if (!p) return kFail;
    RunOptions opts;
    opts.seed = seed;
    opts.quiescence = std::chrono::milliseconds(quiescence_ms);
    RunResult r = run_program(*p, opts);
    switch (r.status) {
      case RunResult::Status::Ok:
        std::cout << show_value(r.value) << '\n';
        return kOk;
      case RunResult::Status::Deadlock:
        std::cerr << r.message << '\n';
        return kDeadlock;
      case RunResult::Status::Error:
        std::cerr << "runtime error: " << r.message << '\n';
        return kFail;
    }
  }

  TypeContext ctx;
  if (!context_file.empty()) {
    auto p = load(context_file, eq);
    if (!p) return kFail;
    Diagnostics diags;
    auto env = build_global_env(*p, diags);
    ctx.abbrevs = env->abbrevs;
    ctx.data = env->data_kinds;
  }

  try {
    if (equiv->parsed()) {
      auto [t1, env1] = load_type(type1, ctx);
      auto [t2, env2] = load_type(type2, ctx);
      env1.insert(env2.begin(), env2.end());
      if (trace) eq.trace = &std::cout;
      Verdict v = equivalence(t1, t2, env1, eq);
      std::cout << to_string(v) << '\n';
      return v == Verdict::Equivalent ? kOk : v == Verdict::NotEquivalent ? kFail : kInconclusive;
    }
    auto [t, env] = load_type(type1, ctx);
    if (!synth_kind(env, t, ctx.data).is_session()) {
      std::cerr << "cfst: " << pretty(t) << " is not a session type\n";
      return kFail;
    }
    if (dual_cmd->parsed()) {
      std::cout << pretty(dual(t)) << '\n';
      return kOk;
    }
    GrammarBuilder b;
    Word start = b.add(t);
    Grammar g = compute_norms(b.finish());
    std::cout << "start = " << to_string(start) << '\n' << dump(g, {start});
    return kOk;
  } catch (const CompileError& e) {
    std::cerr << format_diagnostic("<type>", e.diagnostic()) << '\n';
    return kFail;
  }
}
