#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pric3/frames.hpp"
#include "pric3/mdp.hpp"
#include "pric3/solver.hpp"

namespace pric3 {

enum class OracleKind { Perfect, Simulation, BoundedVi, BfsLp };

inline const char* oracle_name(OracleKind k) {
  switch (k) {
    case OracleKind::Perfect: return "perfect";
    case OracleKind::Simulation: return "simulation";
    case OracleKind::BoundedVi: return "bounded-vi";
    case OracleKind::BfsLp: return "bfs-lp";
  }
  return "?";
}

inline OracleKind parse_oracle_kind(const std::string& s) {
  if (s == "perfect") return OracleKind::Perfect;
  if (s == "simulation") return OracleKind::Simulation;
  if (s == "bounded-vi") return OracleKind::BoundedVi;
  if (s == "bfs-lp") return OracleKind::BfsLp;
  throw ContractViolation("unknown oracle '" + s + "'");
}

struct OracleParams {
  std::size_t runs = 10'000;      // simulation
  std::uint64_t seed = 0;         // simulation
  std::size_t max_run_length = 0; // simulation; 0 means 10 times the BFS depth
  unsigned threads = 1;           // simulation
  std::size_t vi_steps = 100;     // bounded value iteration
  std::size_t bfs_limit = 5'000;  // explored states for bfs-lp
  SolverOptions solver;
};

struct Oracle {
  OracleKind kind = OracleKind::Perfect;
  std::vector<Probability> values;
  bool exact = true;  // false when a floating-point solve contributed
  std::size_t refinements = 0;

  const Probability& value(StateId s) const { return values.at(s); }
};

namespace detail {

inline std::vector<Probability> simulate(const Mdp& mdp, const OracleParams& p) {
  const std::size_t n = mdp.num_states();
  const std::size_t cap = p.max_run_length ? p.max_run_length : 10 * std::max<std::size_t>(mdp.depth(), 1);
  const unsigned workers = std::max(1u, std::min<unsigned>(p.threads, static_cast<unsigned>(p.runs)));
  std::vector<std::vector<std::uint64_t>> visits(workers, std::vector<std::uint64_t>(n, 0)),
      hits(workers, std::vector<std::uint64_t>(n, 0));

  auto work = [&](unsigned w) {
    std::vector<std::size_t> stamp(n, SIZE_MAX);
    std::vector<StateId> seen;
    for (std::size_t run = w; run < p.runs; run += workers) {
      std::seed_seq seq{p.seed, static_cast<std::uint64_t>(run)};
      std::mt19937_64 rng(seq);
      auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
      seen.clear();
      StateId s = mdp.initial();
      bool reached = false;
      for (std::size_t step = 0;; ++step) {
        if (stamp[s] != run) {
          stamp[s] = run;
          seen.push_back(s);
        }
        if (mdp.is_bad(s)) {
          reached = true;
          break;
        }
        auto acts = mdp.actions(s);
        if (step >= cap) break;
        if (acts.size() == 1) {
          auto only = mdp.transitions(acts[0]);
          if (only.size() == 1 && only[0].target == s) break;
        }
        const auto& a = acts[static_cast<std::size_t>(uniform() * static_cast<double>(acts.size()))];
        auto tr = mdp.transitions(a);
        double u = uniform(), acc = 0.0;
        StateId next = tr.back().target;
        for (const auto& t : tr) {
          acc += t.probability.get_d();
          if (u < acc) {
            next = t.target;
            break;
          }
        }
        s = next;
      }
      for (auto v : seen) {
        ++visits[w][v];
        if (reached) ++hits[w][v];
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  std::vector<Probability> out(n);
  for (StateId s = 0; s < n; ++s) {
    std::uint64_t v = 0, h = 0;
    for (unsigned w = 0; w < workers; ++w) {
      v += visits[w][s];
      h += hits[w][s];
    }
    if (mdp.is_bad(s)) out[s] = 1;
    else if (v == 0) out[s] = Probability(1, 2);
    else {
      out[s] = Probability(static_cast<unsigned long>(h), static_cast<unsigned long>(v));
      out[s].canonicalize();
    }
  }
  return out;
}

inline std::vector<StateId> bfs_prefix(const Mdp& mdp, std::size_t limit) {
  std::vector<char> seen(mdp.num_states(), 0);
  std::vector<StateId> order{mdp.initial()};
  seen[mdp.initial()] = 1;
  for (std::size_t head = 0; head < order.size() && head < limit; ++head)
    for (const auto& a : mdp.actions(order[head]))
      for (const auto& t : mdp.transitions(a))
        if (!seen[t.target]) {
          seen[t.target] = 1;
          order.push_back(t.target);
        }
  if (order.size() > limit) order.resize(limit);
  return order;
}

}  // namespace detail

inline Oracle build_oracle(const Mdp& mdp, OracleKind kind, const OracleParams& params = {}) {
  Oracle o;
  o.kind = kind;
  switch (kind) {
    case OracleKind::Perfect: {
      auto sol = solve_exact_max_reach(mdp, params.solver);
      o.values = std::move(sol.values);
      o.exact = sol.exact;
      break;
    }
    case OracleKind::Simulation:
      if (params.runs == 0) throw ContractViolation("simulation needs at least one run");
      o.values = detail::simulate(mdp, params);
      break;
    case OracleKind::BoundedVi:
      o.values = bounded_reach_all(mdp, params.vi_steps);
      break;
    case OracleKind::BfsLp: {
      if (params.bfs_limit == 0) throw ContractViolation("bfs-lp needs a positive state limit");
      auto explored = detail::bfs_prefix(mdp, params.bfs_limit);
      auto pr = restrict_problem(mdp, explored, [](StateId) { return Probability(1); });
      auto sol = solve_reach_problem(pr, params.solver);
      o.values.assign(mdp.num_states(), Probability(1));
      for (std::size_t i = 0; i < explored.size(); ++i) o.values[explored[i]] = sol.values[i];
      o.exact = sol.exact;
      break;
    }
  }
  return o;
}

// Re-solves the touched subsystem, with mass leaving it weighted by the old estimate.
inline Oracle refine(const Oracle& old, const Mdp& mdp, const StateSet& touched, const SolverOptions& solver = {}) {
  if (!touched.count(mdp.initial())) throw ContractViolation("touched set must contain the initial state");
  std::vector<StateId> states(touched.begin(), touched.end());
  auto pr = restrict_problem(mdp, states, [&](StateId t) { return old.values[t]; });
  auto sol = solve_reach_problem(pr, solver);
  Oracle out = old;
  for (std::size_t i = 0; i < states.size(); ++i) out.values[states[i]] = sol.values[i];
  out.exact = old.exact && sol.exact;
  ++out.refinements;
  return out;
}

// touched ∪ subsystem; when that adds nothing, also the one-step successors.
inline StateSet enlarge(const StateSet& touched, const StateSet& subsystem, const Mdp& mdp) {
  StateSet out = touched;
  out.insert(subsystem.begin(), subsystem.end());
  if (out.size() > touched.size()) return out;
  for (StateId s : touched)
    for (const auto& a : mdp.actions(s))
      for (const auto& t : mdp.transitions(a)) out.insert(t.target);
  return out;
}

// One "state value" line per state.
inline void write_oracle(std::ostream& os, const Oracle& o) {
  os << "# oracle " << oracle_name(o.kind) << " states " << o.values.size() << "\n";
  for (std::size_t s = 0; s < o.values.size(); ++s) os << s << " " << to_string(o.values[s]) << "\n";
}

inline Oracle read_oracle(std::istream& is, const Mdp& mdp, OracleKind kind = OracleKind::Perfect) {
  Oracle o;
  o.kind = kind;
  o.values.assign(mdp.num_states(), Probability(1, 2));
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::size_t s;
    std::string v;
    if (!(ls >> s >> v) || s >= mdp.num_states()) throw ModelError("bad oracle line: " + line);
    o.values[s] = parse_rational(v);
  }
  return o;
}

}  // namespace pric3
