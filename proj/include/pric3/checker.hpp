#pragma once

#include <chrono>
#include <optional>
#include <vector>

#include "pric3/core.hpp"
#include "pric3/oracle.hpp"

namespace pric3 {

struct CheckerOptions {
  OracleKind oracle = OracleKind::BfsLp;
  OracleParams oracle_params;
  CoreOptions core;
  SolverOptions solver;
};

struct CoreCallStats {
  std::size_t iterations = 0;
  std::size_t obligations = 0;
  std::size_t subsystem_size = 0;  // 0 when the call proved safety
  bool safe = false;
  bool zeno = false;
  double wall_ms = 0;
};

struct CheckerStats {
  std::size_t outer_iterations = 0;
  std::size_t core_calls = 0;
  std::size_t core_iterations = 0;  // sum of the final k over all core calls
  std::size_t obligations = 0;      // popped obligations
  std::size_t generalizations_tried = 0;
  std::size_t generalizations_ok = 0;
  std::size_t submdp_max_size = 0;
  std::size_t refutation_calls = 0;
  std::size_t zeno_stops = 0;
  std::size_t cores_reused = 0;
  double oracle_ms = 0;
  double wall_ms = 0;
  std::vector<CoreCallStats> cores;
};

enum class VerdictReason {
  Inductive,  // two equal consecutive frames
  Refuted,    // a subsystem already exceeds the threshold
  Oracle,     // every reachable state touched, oracle is exact there
};

inline const char* reason_name(VerdictReason r) {
  switch (r) {
    case VerdictReason::Inductive: return "inductive";
    case VerdictReason::Refuted: return "refuted";
    case VerdictReason::Oracle: return "oracle";
  }
  return "?";
}

struct Verdict {
  bool safe = false;
  VerdictReason reason = VerdictReason::Inductive;
  Probability lambda;
  std::optional<FrameSeq> frames;          // safe by induction
  StateSet subsystem;                      // refuted
  std::optional<Probability> probability;  // max reachability of the refuting subsystem, or the oracle value
  bool exact = true;
  CheckerStats stats;
};

inline Heuristic create_heuristic(const Oracle& oracle, const Probability& lambda) {
  return lambda == 0 ? make_h0() : Heuristic::from_oracle(oracle);
}

struct RefutationResult {
  bool refuted = false;
  Probability probability;
  bool exact = true;
};

// Decides whether the subsystem on its own already exceeds lambda.
inline RefutationResult check_refutation_detail(const StateSet& subsystem, const Mdp& mdp, const Probability& lambda,
                                                const SolverOptions& solver = {}) {
  SubMdp sub(mdp, subsystem);
  RefutationResult r;
  if (lambda == 0) {
    r.refuted = reaches_bad(sub);
    if (!r.refuted) {
      r.probability = 0;
      return r;
    }
  }
  auto sol = solve_exact_max_reach(sub, solver);
  r.probability = sol.values[mdp.initial()];
  r.exact = sol.exact;
  if (lambda == 0) return r;
  // An approximate value only refutes with a margin beyond its error bound.
  Probability margin = sol.exact ? Probability(0) : Probability(solver.precision);
  r.refuted = r.probability - margin > lambda;
  return r;
}

inline bool check_refutation(const StateSet& subsystem, const Mdp& mdp, const Probability& lambda,
                             const SolverOptions& solver = {}) {
  return check_refutation_detail(subsystem, mdp, lambda, solver).refuted;
}

// Oracle-guided checking with counterexample refinement.
inline Verdict check_threshold(const Mdp& mdp, const Probability& lambda, const CheckerOptions& opt = {}) {
  if (lambda < 0 || lambda > 1) throw ContractViolation("threshold must lie in [0,1]");
  const auto start = std::chrono::steady_clock::now();
  auto ms_since = [](auto t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  Verdict v;
  v.lambda = lambda;
  auto& st = v.stats;
  auto done = [&]() -> Verdict {
    st.wall_ms = ms_since(start);
    return std::move(v);
  };

  auto t0 = std::chrono::steady_clock::now();
  OracleParams params = opt.oracle_params;
  params.solver = opt.solver;
  Oracle oracle = lambda == 0 ? Oracle{OracleKind::Perfect, {}, true, 0} : build_oracle(mdp, opt.oracle, params);
  st.oracle_ms = ms_since(t0);

  const std::size_t reachable = reachable_states(mdp).size();
  StateSet touched{mdp.initial()};
  // The core is deterministic in (oracle, lambda): when refining left the oracle
  // unchanged, the previous result and refutation check are reused.
  std::optional<std::vector<Probability>> last_values;
  StateSet last_subsystem;
  do {
    ++st.outer_iterations;
    if (last_values && *last_values == oracle.values) {
      ++st.cores_reused;
      touched = enlarge(touched, last_subsystem, mdp);
      t0 = std::chrono::steady_clock::now();
      oracle = refine(oracle, mdp, touched, opt.solver);
      st.oracle_ms += ms_since(t0);
      continue;
    }
    Heuristic h = create_heuristic(oracle, lambda);
    CoreStats cs;
    auto res = pric3_h(mdp, lambda, h, opt.core, &cs);
    ++st.core_calls;
    st.core_iterations += cs.iterations;
    st.obligations += cs.strengthen.pops;
    st.generalizations_tried += cs.strengthen.generalize.attempts;
    st.generalizations_ok += cs.strengthen.generalize.accepted;
    if (res.zeno) ++st.zeno_stops;
    st.cores.push_back({cs.iterations, cs.strengthen.pops, res.subsystem ? res.subsystem->size() : 0, res.safe,
                        res.zeno, cs.wall_ms});
    if (res.safe) {
      v.safe = true;
      v.reason = VerdictReason::Inductive;
      v.frames = std::move(res.frames);
      return done();
    }
    const StateSet& subsystem = *res.subsystem;
    ++st.refutation_calls;
    st.submdp_max_size = std::max(st.submdp_max_size, subsystem.size());
    auto ref = check_refutation_detail(subsystem, mdp, lambda, opt.solver);
    if (ref.refuted) {
      v.safe = false;
      v.reason = VerdictReason::Refuted;
      v.subsystem = subsystem;
      v.probability = ref.probability;
      v.exact = ref.exact;
      return done();
    }
    touched = enlarge(touched, subsystem, mdp);
    if (lambda != 0) {
      last_values = oracle.values;
      last_subsystem = subsystem;
      t0 = std::chrono::steady_clock::now();
      oracle = refine(oracle, mdp, touched, opt.solver);
      st.oracle_ms += ms_since(t0);
    }
  } while (touched.size() < reachable);

  // Every reachable state has been refined: the oracle is exact at the initial state.
  if (lambda == 0) {
    oracle = build_oracle(mdp, OracleKind::Perfect, params);
  }
  Probability value = oracle.value(mdp.initial());
  v.safe = value <= lambda;
  v.reason = VerdictReason::Oracle;
  v.probability = value;
  v.exact = oracle.exact;
  if (!v.safe) v.subsystem = touched;
  return done();
}

}  // namespace pric3
