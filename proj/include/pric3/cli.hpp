#pragma once

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pric3/checker.hpp"
#include "pric3/generators.hpp"
#include "pric3/parser.hpp"
#include "pric3/report.hpp"
#include "pric3/state_space.hpp"

namespace pric3 {

inline constexpr int kExitSafe = 0;
inline constexpr int kExitUnsafe = 1;
inline constexpr int kExitError = 2;

namespace detail {

inline std::pair<std::string, std::string> split_assignment(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ModelError("expected NAME=VALUE, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

inline ConstantMap parse_constants(const std::vector<std::string>& defs) {
  ConstantMap out;
  for (const auto& d : defs) {
    auto [name, value] = split_assignment(d);
    if (value == "true") out[name] = 1;
    else if (value == "false") out[name] = 0;
    else out[name] = parse_rational(value);
  }
  return out;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CheckArgs {
  std::string file;
  std::string lambda;
  std::vector<std::string> consts;
  std::string oracle = "bfs-lp";
  std::optional<std::uint64_t> oracle_param;
  std::string generalize = "none";
  std::string engine = "pric3";
  std::uint64_t seed = 0;
  std::string stats_out;
  std::string trace;
  unsigned threads = 1;
  std::size_t max_frames = 10'000;
  std::size_t max_states = 5'000'000;
  bool no_propagate = false;
  bool no_repush = false;
};

inline int run_check(const CheckArgs& a, std::ostream& out) {
  Probability lambda = parse_rational(a.lambda);
  if (lambda < 0 || lambda > 1) throw ModelError("range: threshold " + a.lambda + " must lie in [0,1]");
  if (a.engine != "pric3" && a.engine != "exact") throw ModelError("unknown engine '" + a.engine + "'");

  const auto start = std::chrono::steady_clock::now();
  auto program = parse_program(slurp(a.file), parse_constants(a.consts));
  StateSpaceOptions so;
  so.max_states = a.max_states;
  Mdp mdp = build_state_space(program, so);

  RunInfo info;
  info.engine = a.engine;
  info.states = mdp.num_states();
  Verdict v;
  if (a.engine == "exact") {
    auto sol = solve_exact_max_reach(mdp);
    v.lambda = lambda;
    v.probability = sol.values[mdp.initial()];
    v.exact = sol.exact;
    v.safe = *v.probability <= lambda;
    v.stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  } else {
    CheckerOptions opt;
    opt.oracle = parse_oracle_kind(a.oracle);
    opt.oracle_params.seed = a.seed;
    opt.oracle_params.threads = a.threads;
    if (a.oracle_param) {
      switch (opt.oracle) {
        case OracleKind::Simulation: opt.oracle_params.runs = *a.oracle_param; break;
        case OracleKind::BoundedVi: opt.oracle_params.vi_steps = *a.oracle_param; break;
        case OracleKind::BfsLp: opt.oracle_params.bfs_limit = *a.oracle_param; break;
        case OracleKind::Perfect: break;
      }
    }
    opt.core.max_frames = a.max_frames;
    opt.core.propagate = !a.no_propagate;
    opt.core.strengthen.repush = !a.no_repush;
    opt.core.strengthen.generalize.mode = parse_generalize_mode(a.generalize);
    std::ofstream trace_file;
    std::unique_ptr<TraceWriter> trace;
    if (!a.trace.empty()) {
      trace_file.open(a.trace);
      if (!trace_file) throw ModelError("cannot write '" + a.trace + "'");
      trace = std::make_unique<TraceWriter>(trace_file);
      opt.core.strengthen.observer = trace.get();
    }
    info.oracle = a.oracle;
    info.generalize = a.generalize;
    v = check_threshold(mdp, lambda, opt);
  }

  out << "model: " << a.file << " (" << mdp.num_states() << " states)\n";
  out << "threshold: " << to_string(lambda) << "\n";
  out << "verdict: " << (v.safe ? "safe" : "unsafe") << "\n";
  if (v.probability) {
    out << (a.engine == "exact" ? "max reachability: " : v.reason == VerdictReason::Refuted ? "subsystem probability: "
                                                                                            : "oracle value: ")
        << to_string(*v.probability) << (v.exact ? "" : " (approximate)") << " ~ " << to_double(*v.probability) << "\n";
  }
  if (a.engine != "exact") {
    out << "reason: " << reason_name(v.reason) << "\n";
    out << "outer iterations: " << v.stats.outer_iterations << ", core iterations: " << v.stats.core_iterations
        << ", obligations: " << v.stats.obligations << "\n";
  }
  out << "time: " << v.stats.wall_ms << " ms\n";

  if (!a.stats_out.empty()) {
    std::ofstream js(a.stats_out);
    if (!js) throw ModelError("cannot write '" + a.stats_out + "'");
    js << verdict_json(v, info).dump(2) << "\n";
  }
  return v.safe ? kExitSafe : kExitUnsafe;
}

}  // namespace detail

// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Threshold checker for maximal reachability probabilities in finite MDPs", "pric3"};
  app.require_subcommand(1);

  detail::CheckArgs ca;
  auto* check = app.add_subcommand("check", "Decide whether Pr^max(init reaches bad) <= lambda");
  check->add_option("file", ca.file, "Model file")->required();
  check->add_option("--lambda", ca.lambda, "Threshold, rational or decimal")->required();
  check->add_option("--const", ca.consts, "Constant definition NAME=VALUE (repeatable)");
  check->add_option("--oracle", ca.oracle, "perfect | simulation | bounded-vi | bfs-lp");
  check->add_option("--oracle-param", ca.oracle_param, "Runs, value-iteration steps or BFS state limit");
  check->add_option("--generalize", ca.generalize, "none | constant | linear | polynomial | hybrid");
  check->add_option("--engine", ca.engine, "pric3 | exact");
  check->add_option("--seed", ca.seed, "Simulation seed");
  check->add_option("--stats-out", ca.stats_out, "Write JSON statistics to this file");
  check->add_option("--trace", ca.trace, "Write the obligation trace to this file");
  check->add_option("--threads", ca.threads, "Threads for the simulation oracle");
  check->add_option("--max-frames", ca.max_frames, "Frame limit per core call");
  check->add_option("--max-states", ca.max_states, "State-space size limit");
  check->add_flag("--no-propagate", ca.no_propagate, "Skip copying inductive entries into the next frame");
  check->add_flag("--no-repush", ca.no_repush, "Do not re-push resolved obligations to the next frame");

  std::string family, gen_out;
  std::vector<std::string> gen_params;
  auto* gen = app.add_subcommand("generate", "Print a chain or double_chain model");
  gen->add_option("family", family, "chain | double_chain")->required();
  gen->add_option("params", gen_params, "NAME=VALUE pairs, e.g. N=100 p=9/10");
  gen->add_option("-o,--output", gen_out, "Output file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitSafe;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitSafe;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (*check) return detail::run_check(ca, out);
    std::map<std::string, std::string> params;
    for (const auto& p : gen_params) params.insert(detail::split_assignment(p));
    auto text = generate_model(family, params);
    if (gen_out.empty()) {
      out << text;
    } else {
      std::ofstream f(gen_out);
      if (!f) throw ModelError("cannot write '" + gen_out + "'");
      f << text;
    }
    return kExitSafe;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ResourceError& e) {
    err << "resource limit: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace pric3
