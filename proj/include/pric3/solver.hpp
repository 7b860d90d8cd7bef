#pragma once

// Maximal reachability probabilities.
//
// Small models: graph preprocessing for the probability-0 states, then policy
// iteration starting from an attractor policy. Each policy is evaluated SCC by
// SCC (sinks first) with exact sparse Gaussian elimination, and a policy only
// switches on strict improvement, so every intermediate policy reaches the
// target with positive probability and the systems stay non-singular.
//
// Large models: interval iteration in doubles, with end components collapsed
// onto their best exit for the upper bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "pric3/mdp.hpp"

namespace pric3 {

// Flat reachability instance; possibly substochastic. Bad states have value 1.
struct ReachProblem {
  std::size_t n = 0;
  std::vector<char> bad;
  std::vector<std::uint32_t> action_begin{0};  // per state, into trans_begin
  std::vector<std::uint32_t> trans_begin{0};   // per action, into target/prob
  std::vector<std::uint32_t> target;
  std::vector<Probability> prob;

  std::size_t num_actions(std::size_t s) const { return action_begin[s + 1] - action_begin[s]; }

  std::uint32_t add_state(bool is_bad) {
    bad.push_back(is_bad ? 1 : 0);
    action_begin.push_back(action_begin.back());
    return static_cast<std::uint32_t>(n++);
  }
  // Actions must be added for the most recently added state.
  void begin_action() {
    trans_begin.push_back(trans_begin.back());
    ++action_begin.back();
  }
  void add_transition(std::uint32_t t, Probability p) {
    target.push_back(t);
    prob.push_back(std::move(p));
    ++trans_begin.back();
  }
};

struct SolverOptions {
  std::size_t exact_limit = 50'000;  // above this many states, iterate in floating point
  double precision = 1e-8;
  std::size_t max_sweeps = 20'000'000;
};

struct ReachSolution {
  std::vector<Probability> values;
  std::vector<std::int32_t> choice;  // maximizing local action per state, -1 if irrelevant
  bool exact = true;
};

namespace detail {

// Iterative Tarjan. Returns component id per node (-1 for inactive) and the
// number of components; ids are assigned sinks first.
struct SccResult {
  std::vector<std::int32_t> comp;
  std::size_t count = 0;
};

inline SccResult tarjan(std::size_t n, const std::vector<char>& active, const std::vector<std::uint32_t>& adj_begin,
                        const std::vector<std::uint32_t>& adj) {
  SccResult r;
  r.comp.assign(n, -1);
  std::vector<std::uint32_t> index(n, UINT32_MAX), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::uint32_t> stack;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> call;
  std::uint32_t counter = 0;
  for (std::uint32_t root = 0; root < n; ++root) {
    if (!active[root] || index[root] != UINT32_MAX) continue;
    call.push_back({root, adj_begin[root]});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, next] = call.back();
      if (next < adj_begin[v + 1]) {
        std::uint32_t w = adj[next++];
        if (!active[w]) continue;
        if (index[w] == UINT32_MAX) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, adj_begin[w]});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      std::uint32_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        while (true) {
          std::uint32_t w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          r.comp[w] = static_cast<std::int32_t>(r.count);
          if (w == done) break;
        }
        ++r.count;
      }
    }
  }
  return r;
}

// Reverse edges: for each target, the (source, global action) pairs leading to it.
struct Predecessors {
  std::vector<std::uint32_t> begin;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
};

inline Predecessors predecessors(const ReachProblem& pr) {
  Predecessors r;
  r.begin.assign(pr.n + 1, 0);
  for (std::size_t s = 0; s < pr.n; ++s)
    for (auto a = pr.action_begin[s]; a < pr.action_begin[s + 1]; ++a)
      for (auto k = pr.trans_begin[a]; k < pr.trans_begin[a + 1]; ++k) ++r.begin[pr.target[k] + 1];
  for (std::size_t s = 0; s < pr.n; ++s) r.begin[s + 1] += r.begin[s];
  r.edges.resize(r.begin.back());
  auto fill = r.begin;
  for (std::uint32_t s = 0; s < pr.n; ++s)
    for (auto a = pr.action_begin[s]; a < pr.action_begin[s + 1]; ++a)
      for (auto k = pr.trans_begin[a]; k < pr.trans_begin[a + 1]; ++k) r.edges[fill[pr.target[k]]++] = {s, a};
  return r;
}

// States from which some bad state is reachable with positive probability.
inline std::vector<char> can_reach_bad(const ReachProblem& pr, const Predecessors& pred) {
  std::vector<char> seen(pr.n, 0);
  std::vector<std::uint32_t> stack;
  for (std::uint32_t s = 0; s < pr.n; ++s)
    if (pr.bad[s]) {
      seen[s] = 1;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    auto t = stack.back();
    stack.pop_back();
    for (auto k = pred.begin[t]; k < pred.begin[t + 1]; ++k) {
      auto src = pred.edges[k].first;
      if (!seen[src]) {
        seen[src] = 1;
        stack.push_back(src);
      }
    }
  }
  return seen;
}

inline std::vector<char> can_reach_bad(const ReachProblem& pr) { return can_reach_bad(pr, predecessors(pr)); }

// Exact solve of x = A x + b restricted to one SCC. Rows are (I - P_scc).
inline void solve_component(const std::vector<std::uint32_t>& members, const ReachProblem& pr,
                            const std::vector<std::int32_t>& choice, const std::vector<std::int32_t>& comp,
                            std::int32_t cid, std::vector<Probability>& x) {
  const std::size_t m = members.size();
  std::map<std::uint32_t, std::uint32_t> local;
  for (std::uint32_t i = 0; i < m; ++i) local[members[i]] = i;
  std::vector<std::map<std::uint32_t, Probability>> rows(m);
  std::vector<Probability> rhs(m);
  std::vector<std::vector<std::uint32_t>> col_rows(m);
  for (std::uint32_t i = 0; i < m; ++i) {
    const auto s = members[i];
    rows[i][i] = 1;
    col_rows[i].push_back(i);
    const auto a = pr.action_begin[s] + static_cast<std::uint32_t>(choice[s]);
    for (auto k = pr.trans_begin[a]; k < pr.trans_begin[a + 1]; ++k) {
      const auto t = pr.target[k];
      if (comp[t] == cid) {
        auto j = local[t];
        auto [it, fresh] = rows[i].try_emplace(j, 0);
        it->second -= pr.prob[k];
        if (fresh) col_rows[j].push_back(i);
      } else {
        rhs[i] += pr.prob[k] * x[t];
      }
    }
  }
  for (std::uint32_t j = 0; j < m; ++j) {
    auto& pivot_row = rows[j];
    const Probability pivot = pivot_row.at(j);
    if (pivot == 0) throw InternalError("singular system while evaluating a policy");
    if (pivot != 1) {
      for (auto& [c, v] : pivot_row) v /= pivot;
      rhs[j] /= pivot;
    }
    for (auto r : col_rows[j]) {
      if (r <= j) continue;
      auto it = rows[r].find(j);
      if (it == rows[r].end()) continue;
      const Probability f = it->second;
      rows[r].erase(it);
      for (const auto& [c, v] : pivot_row) {
        if (c == j) continue;
        auto [cell, fresh] = rows[r].try_emplace(c, 0);
        cell->second -= f * v;
        if (fresh) col_rows[c].push_back(r);
      }
      rhs[r] -= f * rhs[j];
    }
  }
  for (std::uint32_t j = m; j-- > 0;) {
    Probability v = rhs[j];
    for (const auto& [c, a] : rows[j])
      if (c > j) v -= a * x[members[c]];
    x[members[j]] = v;
  }
}

inline void evaluate_policy(const ReachProblem& pr, const std::vector<char>& maybe,
                            const std::vector<std::int32_t>& choice, std::vector<Probability>& x) {
  std::vector<std::uint32_t> adj_begin(pr.n + 1, 0), adj;
  for (std::size_t s = 0; s < pr.n; ++s) {
    if (maybe[s]) {
      const auto a = pr.action_begin[s] + static_cast<std::uint32_t>(choice[s]);
      for (auto k = pr.trans_begin[a]; k < pr.trans_begin[a + 1]; ++k)
        if (maybe[pr.target[k]]) adj.push_back(pr.target[k]);
    }
    adj_begin[s + 1] = static_cast<std::uint32_t>(adj.size());
  }
  auto scc = tarjan(pr.n, maybe, adj_begin, adj);
  std::vector<std::vector<std::uint32_t>> members(scc.count);
  for (std::uint32_t s = 0; s < pr.n; ++s)
    if (scc.comp[s] >= 0) members[static_cast<std::size_t>(scc.comp[s])].push_back(s);
  for (std::size_t c = 0; c < scc.count; ++c) {
    const auto& mem = members[c];
    const auto s = mem.front();
    bool trivial = mem.size() == 1;
    if (trivial)
      for (auto k = adj_begin[s]; k < adj_begin[s + 1]; ++k)
        if (adj[k] == s) trivial = false;
    if (trivial) {
      Probability v(0);
      const auto a = pr.action_begin[s] + static_cast<std::uint32_t>(choice[s]);
      for (auto k = pr.trans_begin[a]; k < pr.trans_begin[a + 1]; ++k) v += pr.prob[k] * x[pr.target[k]];
      x[s] = v;
    } else {
      solve_component(mem, pr, choice, scc.comp, static_cast<std::int32_t>(c), x);
    }
  }
}

inline ReachSolution solve_exact(const ReachProblem& pr, const std::vector<char>& maybe) {
  ReachSolution sol;
  sol.values.assign(pr.n, Probability(0));
  sol.choice.assign(pr.n, -1);
  for (std::size_t s = 0; s < pr.n; ++s)
    if (pr.bad[s]) sol.values[s] = 1;

  // Attractor policy: backward BFS from the bad states; each state takes the
  // action through which it was discovered.
  const auto pred = predecessors(pr);
  std::vector<char> done(pr.n, 0);
  std::vector<std::uint32_t> queue;
  for (std::uint32_t s = 0; s < pr.n; ++s)
    if (pr.bad[s]) {
      done[s] = 1;
      queue.push_back(s);
    }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    auto t = queue[head];
    for (auto k = pred.begin[t]; k < pred.begin[t + 1]; ++k) {
      auto [src, a] = pred.edges[k];
      if (done[src] || !maybe[src]) continue;
      done[src] = 1;
      sol.choice[src] = static_cast<std::int32_t>(a - pr.action_begin[src]);
      queue.push_back(src);
    }
  }

  while (true) {
    evaluate_policy(pr, maybe, sol.choice, sol.values);
    bool changed = false;
    for (std::size_t s = 0; s < pr.n; ++s) {
      if (!maybe[s]) continue;
      Probability best = sol.values[s];
      std::int32_t best_a = -1;
      for (auto a = pr.action_begin[s]; a < pr.action_begin[s + 1]; ++a) {
        Probability v(0);
        for (auto k = pr.trans_begin[a]; k < pr.trans_begin[a + 1]; ++k) v += pr.prob[k] * sol.values[pr.target[k]];
        if (v > best) {
          best = v;
          best_a = static_cast<std::int32_t>(a - pr.action_begin[s]);
        }
      }
      if (best_a >= 0) {
        sol.choice[s] = best_a;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return sol;
}

// Maximal end components among the given states, by repeated SCC refinement.
inline std::vector<std::vector<std::uint32_t>> maximal_end_components(const ReachProblem& pr,
                                                                      const std::vector<char>& among) {
  std::vector<char> cand = among;
  std::vector<char> ok(pr.trans_begin.size() - 1, 0);
  for (std::size_t s = 0; s < pr.n; ++s)
    if (cand[s])
      for (auto a = pr.action_begin[s]; a < pr.action_begin[s + 1]; ++a) ok[a] = 1;
  SccResult scc;
  while (true) {
    bool changed = false;
    for (std::size_t s = 0; s < pr.n; ++s) {
      if (!cand[s]) continue;
      for (auto a = pr.action_begin[s]; a < pr.action_begin[s + 1]; ++a)
        if (ok[a])
          for (auto k = pr.trans_begin[a]; k < pr.trans_begin[a + 1]; ++k)
            if (!cand[pr.target[k]]) {
              ok[a] = 0;
              changed = true;
              break;
            }
    }
    std::vector<std::uint32_t> adj_begin(pr.n + 1, 0), adj;
    for (std::size_t s = 0; s < pr.n; ++s) {
      if (cand[s])
        for (auto a = pr.action_begin[s]; a < pr.action_begin[s + 1]; ++a)
          if (ok[a])
            for (auto k = pr.trans_begin[a]; k < pr.trans_begin[a + 1]; ++k) adj.push_back(pr.target[k]);
      adj_begin[s + 1] = static_cast<std::uint32_t>(adj.size());
    }
    scc = tarjan(pr.n, cand, adj_begin, adj);
    for (std::size_t s = 0; s < pr.n; ++s) {
      if (!cand[s]) continue;
      bool any = false;
      for (auto a = pr.action_begin[s]; a < pr.action_begin[s + 1]; ++a) {
        if (!ok[a]) continue;
        for (auto k = pr.trans_begin[a]; k < pr.trans_begin[a + 1]; ++k)
          if (scc.comp[pr.target[k]] != scc.comp[s]) {
            ok[a] = 0;
            changed = true;
            break;
          }
        any = any || ok[a];
      }
      if (!any) {
        cand[s] = 0;
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::vector<std::vector<std::uint32_t>> mecs(scc.count);
  for (std::uint32_t s = 0; s < pr.n; ++s)
    if (cand[s]) mecs[static_cast<std::size_t>(scc.comp[s])].push_back(s);
  std::erase_if(mecs, [](const auto& c) { return c.empty(); });
  return mecs;
}

inline ReachSolution solve_interval(const ReachProblem& pr, const std::vector<char>& maybe,
                                    const SolverOptions& opt) {
  const std::size_t n = pr.n;
  std::vector<double> lo(n, 0.0), hi(n, 0.0), p(pr.prob.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = pr.prob[k].get_d();
  std::vector<std::uint32_t> order;
  for (std::size_t s = 0; s < n; ++s) {
    if (pr.bad[s]) lo[s] = hi[s] = 1.0;
    if (maybe[s]) {
      hi[s] = 1.0;
      order.push_back(static_cast<std::uint32_t>(s));
    }
  }
  std::reverse(order.begin(), order.end());
  auto mecs = maximal_end_components(pr, maybe);
  std::vector<std::int32_t> mec_of(n, -1);
  for (std::size_t c = 0; c < mecs.size(); ++c)
    for (auto s : mecs[c]) mec_of[s] = static_cast<std::int32_t>(c);

  auto best = [&](std::uint32_t s, const std::vector<double>& v) {
    double b = 0.0;
    for (auto a = pr.action_begin[s]; a < pr.action_begin[s + 1]; ++a) {
      double acc = 0.0;
      for (auto k = pr.trans_begin[a]; k < pr.trans_begin[a + 1]; ++k) acc += p[k] * v[pr.target[k]];
      b = std::max(b, acc);
    }
    return b;
  };

  for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    for (auto s : order) {
      lo[s] = std::max(lo[s], best(s, lo));
      hi[s] = std::min(hi[s], best(s, hi));
    }
    for (std::size_t c = 0; c < mecs.size(); ++c) {
      double exit = 0.0;
      for (auto s : mecs[c])
        for (auto a = pr.action_begin[s]; a < pr.action_begin[s + 1]; ++a) {
          bool leaves = false;
          double acc = 0.0;
          for (auto k = pr.trans_begin[a]; k < pr.trans_begin[a + 1]; ++k) {
            acc += p[k] * hi[pr.target[k]];
            leaves = leaves || mec_of[pr.target[k]] != static_cast<std::int32_t>(c);
          }
          if (leaves) exit = std::max(exit, acc);
        }
      for (auto s : mecs[c]) hi[s] = std::min(hi[s], exit);
    }
    double width = 0.0;
    for (auto s : order) width = std::max(width, hi[s] - lo[s]);
    if (width <= opt.precision) break;
  }
  ReachSolution sol;
  sol.exact = false;
  sol.choice.assign(n, -1);
  sol.values.resize(n);
  for (std::size_t s = 0; s < n; ++s) sol.values[s] = Probability(std::clamp((lo[s] + hi[s]) / 2.0, 0.0, 1.0));
  return sol;
}

}  // namespace detail

inline ReachSolution solve_reach_problem(const ReachProblem& pr, const SolverOptions& opt = {}) {
  auto reach = detail::can_reach_bad(pr);
  std::vector<char> maybe(pr.n, 0);
  for (std::size_t s = 0; s < pr.n; ++s) maybe[s] = reach[s] && !pr.bad[s];
  if (pr.n > opt.exact_limit) return detail::solve_interval(pr, maybe, opt);
  return detail::solve_exact(pr, maybe);
}

// Problem over a list of parent states. Mass leaving the list is dropped, or, when
// exit_value is given, redirected to a fresh bad sink with weight p * exit_value(t).
inline ReachProblem restrict_problem(const Mdp& mdp, const std::vector<StateId>& states,
                                     const std::function<Probability(StateId)>& exit_value = nullptr) {
  ReachProblem pr;
  std::vector<std::uint32_t> local(mdp.num_states(), UINT32_MAX);
  for (std::uint32_t i = 0; i < states.size(); ++i) local[states[i]] = i;
  const std::uint32_t sink = static_cast<std::uint32_t>(states.size());
  bool sink_used = false;
  for (auto s : states) {
    pr.add_state(mdp.is_bad(s));
    if (mdp.is_bad(s)) continue;
    for (const auto& a : mdp.actions(s)) {
      pr.begin_action();
      Probability exit_mass(0);
      for (const auto& t : mdp.transitions(a)) {
        if (local[t.target] != UINT32_MAX) pr.add_transition(local[t.target], t.probability);
        else if (exit_value) exit_mass += t.probability * exit_value(t.target);
      }
      if (exit_mass > 0) {
        pr.add_transition(sink, exit_mass);
        sink_used = true;
      }
    }
  }
  if (sink_used) pr.add_state(true);
  return pr;
}

inline ReachProblem make_problem(const Mdp& mdp) {
  std::vector<StateId> all(mdp.num_states());
  for (StateId s = 0; s < all.size(); ++s) all[s] = s;
  return restrict_problem(mdp, all);
}

// Values indexed by parent state.
inline ReachSolution solve_exact_max_reach(const Mdp& mdp, const SolverOptions& opt = {}) {
  return solve_reach_problem(make_problem(mdp), opt);
}

// Values indexed by parent state; states outside the kept set get 0.
inline ReachSolution solve_exact_max_reach(const SubMdp& sub, const SolverOptions& opt = {}) {
  std::vector<StateId> kept(sub.kept().begin(), sub.kept().end());
  auto local = solve_reach_problem(restrict_problem(sub.parent(), kept), opt);
  ReachSolution out;
  out.exact = local.exact;
  out.values.assign(sub.parent().num_states(), Probability(0));
  out.choice.assign(sub.parent().num_states(), -1);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    out.values[kept[i]] = local.values[i];
    out.choice[kept[i]] = local.choice[i];
  }
  return out;
}

// Whether a bad state is reachable inside the kept set.
inline bool reaches_bad(const SubMdp& sub) {
  std::vector<StateId> kept(sub.kept().begin(), sub.kept().end());
  auto pr = restrict_problem(sub.parent(), kept);
  auto reach = detail::can_reach_bad(pr);
  auto it = std::find(kept.begin(), kept.end(), sub.parent().initial());
  return reach[static_cast<std::size_t>(it - kept.begin())] != 0;
}

}  // namespace pric3
