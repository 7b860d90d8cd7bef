#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pric3/errors.hpp"
#include "pric3/rational.hpp"

namespace pric3 {

using StateId = std::uint32_t;
using ActionId = std::int32_t;
using StateSet = std::set<StateId>;

// Id of the self-loop attached to states without any enabled command.
inline constexpr ActionId kDeadlockAction = -1;

struct Transition {
  StateId target;
  Probability probability;
};

struct VariableInfo {
  std::string name;
  std::int64_t lower = 0;
  std::int64_t upper = 0;
};

struct ValuationHash {
  std::size_t operator()(const std::vector<std::int64_t>& v) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    for (auto x : v) h = (h ^ std::hash<std::int64_t>{}(x)) * 0x100000001b3ull + (h >> 29);
    return h;
  }
};

// Explicit MDP. Immutable once built; states are numbered in discovery order.
class Mdp {
 public:
  struct Action {
    ActionId id;
    std::uint32_t begin;
    std::uint32_t end;
  };

  std::size_t num_states() const { return bad_.size(); }
  StateId initial() const { return initial_; }
  bool is_bad(StateId s) const { return bad_[s] != 0; }

  std::span<const Action> actions(StateId s) const {
    return {actions_.data() + action_begin_[s], actions_.data() + action_begin_[s + 1]};
  }
  std::span<const Transition> transitions(const Action& a) const {
    return {transitions_.data() + a.begin, transitions_.data() + a.end};
  }
  std::span<const Transition> successors(StateId s, std::size_t local_action) const {
    return transitions(actions(s)[local_action]);
  }
  std::size_t num_actions() const { return actions_.size(); }
  std::size_t num_transitions() const { return transitions_.size(); }

  const std::vector<VariableInfo>& variables() const { return variables_; }
  std::size_t num_vars() const { return variables_.size(); }
  std::span<const std::int64_t> valuation(StateId s) const {
    return {valuations_.data() + s * variables_.size(), variables_.size()};
  }
  std::optional<StateId> find_state(const std::vector<std::int64_t>& valuation) const {
    auto it = lookup_.find(valuation);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  std::string action_name(ActionId id) const {
    if (id == kDeadlockAction) return "<deadlock>";
    auto it = action_names_.find(id);
    return it == action_names_.end() ? std::to_string(id) : it->second;
  }

  // A line groups all states that agree on every variable except one.
  std::uint32_t line_of(StateId s, std::size_t var) const { return line_of_[s * variables_.size() + var]; }
  std::span<const StateId> line_members(std::uint32_t line) const {
    return {line_states_.data() + line_begin_[line], line_states_.data() + line_begin_[line + 1]};
  }
  std::size_t line_var(std::uint32_t line) const { return line_var_[line]; }
  std::size_t num_lines() const { return line_var_.size(); }

  // Longest BFS distance from the initial state.
  std::size_t depth() const { return depth_; }

 private:
  friend class MdpBuilder;

  std::vector<std::uint32_t> action_begin_;
  std::vector<Action> actions_;
  std::vector<Transition> transitions_;
  std::vector<char> bad_;
  StateId initial_ = 0;
  std::vector<VariableInfo> variables_;
  std::vector<std::int64_t> valuations_;
  std::unordered_map<std::vector<std::int64_t>, StateId, ValuationHash> lookup_;
  std::map<ActionId, std::string> action_names_;
  std::vector<std::uint32_t> line_of_;
  std::vector<std::uint32_t> line_begin_;
  std::vector<StateId> line_states_;
  std::vector<std::size_t> line_var_;
  std::size_t depth_ = 0;
};

class MdpBuilder {
 public:
  explicit MdpBuilder(std::vector<VariableInfo> variables = {}) : variables_(std::move(variables)) {}

  StateId add_state(std::vector<std::int64_t> valuation = {}, bool bad = false) {
    if (valuation.size() != variables_.size()) throw ContractViolation("valuation arity does not match variables");
    valuations_.push_back(std::move(valuation));
    bad_.push_back(bad ? 1 : 0);
    dists_.emplace_back();
    return static_cast<StateId>(bad_.size() - 1);
  }

  void set_bad(StateId s, bool bad) { bad_.at(s) = bad ? 1 : 0; }
  void set_initial(StateId s) { initial_ = s; }
  void name_action(ActionId id, std::string name) { names_[id] = std::move(name); }

  void add_action(StateId s, ActionId id, std::vector<std::pair<StateId, Probability>> dist) {
    dists_.at(s).push_back({id, std::move(dist)});
  }

  std::size_t size() const { return bad_.size(); }

  Mdp build() && {
    const std::size_t n = bad_.size();
    if (n == 0) throw ContractViolation("MDP without states");
    if (initial_ >= n) throw ContractViolation("initial state out of range");
    Mdp m;
    m.variables_ = std::move(variables_);
    m.bad_ = std::move(bad_);
    m.initial_ = initial_;
    m.action_names_ = std::move(names_);
    m.action_begin_.reserve(n + 1);
    m.action_begin_.push_back(0);
    for (std::size_t s = 0; s < n; ++s) {
      auto& acts = dists_[s];
      if (acts.empty()) acts.push_back({kDeadlockAction, {{static_cast<StateId>(s), Probability(1)}}});
      std::set<ActionId> seen;
      for (auto& [id, dist] : acts) {
        if (!seen.insert(id).second)
          throw ContractViolation("state " + std::to_string(s) + " lists action " + std::to_string(id) + " twice");
        Mdp::Action a{id, static_cast<std::uint32_t>(m.transitions_.size()), 0};
        Probability total(0);
        for (auto& [t, p] : dist) {
          if (t >= n) throw ContractViolation("transition target out of range");
          if (p < 0) throw ContractViolation("negative probability");
          if (p == 0) continue;
          total += p;
          bool merged = false;
          for (auto k = a.begin; k < m.transitions_.size(); ++k) {
            if (m.transitions_[k].target == t) {
              m.transitions_[k].probability += p;
              merged = true;
              break;
            }
          }
          if (!merged) m.transitions_.push_back({t, p});
        }
        if (total != 1)
          throw ContractViolation("distribution of state " + std::to_string(s) + " sums to " + to_string(total));
        a.end = static_cast<std::uint32_t>(m.transitions_.size());
        m.actions_.push_back(a);
      }
      m.action_begin_.push_back(static_cast<std::uint32_t>(m.actions_.size()));
    }
    dists_.clear();

    const std::size_t vars = m.variables_.size();
    m.valuations_.reserve(n * vars);
    for (std::size_t s = 0; s < n; ++s) {
      for (auto x : valuations_[s]) m.valuations_.push_back(x);
      if (vars > 0 && !m.lookup_.emplace(valuations_[s], static_cast<StateId>(s)).second)
        throw ContractViolation("two states share a valuation");
    }
    valuations_.clear();
    build_lines(m);
    compute_depth(m);
    return m;
  }

 private:
  static void build_lines(Mdp& m) {
    const std::size_t n = m.num_states(), vars = m.num_vars();
    m.line_of_.assign(n * vars, 0);
    std::vector<std::vector<StateId>> members;
    for (std::size_t v = 0; v < vars; ++v) {
      std::unordered_map<std::vector<std::int64_t>, std::uint32_t, ValuationHash> index;
      std::vector<std::int64_t> key(vars);
      for (StateId s = 0; s < n; ++s) {
        auto val = m.valuation(s);
        std::copy(val.begin(), val.end(), key.begin());
        key[v] = 0;
        auto [it, fresh] = index.emplace(key, static_cast<std::uint32_t>(members.size()));
        if (fresh) {
          members.emplace_back();
          m.line_var_.push_back(v);
        }
        members[it->second].push_back(s);
        m.line_of_[s * vars + v] = it->second;
      }
    }
    m.line_begin_.push_back(0);
    for (std::size_t l = 0; l < members.size(); ++l) {
      auto& mem = members[l];
      const std::size_t v = m.line_var_[l];
      std::sort(mem.begin(), mem.end(), [&](StateId a, StateId b) { return m.valuation(a)[v] < m.valuation(b)[v]; });
      m.line_states_.insert(m.line_states_.end(), mem.begin(), mem.end());
      m.line_begin_.push_back(static_cast<std::uint32_t>(m.line_states_.size()));
    }
  }

  static void compute_depth(Mdp& m) {
    std::vector<std::uint32_t> dist(m.num_states(), UINT32_MAX);
    std::vector<StateId> queue{m.initial()};
    dist[m.initial()] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      StateId s = queue[head];
      m.depth_ = std::max<std::size_t>(m.depth_, dist[s]);
      for (const auto& a : m.actions(s))
        for (const auto& t : m.transitions(a))
          if (dist[t.target] == UINT32_MAX) {
            dist[t.target] = dist[s] + 1;
            queue.push_back(t.target);
          }
    }
  }

  std::vector<VariableInfo> variables_;
  std::vector<std::vector<std::int64_t>> valuations_;
  std::vector<char> bad_;
  std::vector<std::vector<std::pair<ActionId, std::vector<std::pair<StateId, Probability>>>>> dists_;
  std::map<ActionId, std::string> names_;
  StateId initial_ = 0;
};

inline std::vector<ActionId> enabled_actions(const Mdp& mdp, StateId s) {
  if (s >= mdp.num_states()) throw ContractViolation("state index out of range");
  std::vector<ActionId> ids;
  for (const auto& a : mdp.actions(s)) ids.push_back(a.id);
  return ids;
}

// Position of action id within the state's action list.
inline std::size_t action_position(const Mdp& mdp, StateId s, ActionId a) {
  if (s >= mdp.num_states()) throw ContractViolation("state index out of range");
  auto acts = mdp.actions(s);
  for (std::size_t k = 0; k < acts.size(); ++k)
    if (acts[k].id == a) return k;
  throw ContractViolation("action " + mdp.action_name(a) + " is not enabled in state " + std::to_string(s));
}

inline std::vector<Transition> succs(const Mdp& mdp, StateId s, ActionId a) {
  auto tr = mdp.successors(s, action_position(mdp, s, a));
  return {tr.begin(), tr.end()};
}

inline StateSet reachable_states(const Mdp& mdp) {
  std::vector<char> seen(mdp.num_states(), 0);
  std::vector<StateId> stack{mdp.initial()};
  seen[mdp.initial()] = 1;
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    for (const auto& a : mdp.actions(s))
      for (const auto& t : mdp.transitions(a))
        if (!seen[t.target]) {
          seen[t.target] = 1;
          stack.push_back(t.target);
        }
  }
  StateSet out;
  for (StateId s = 0; s < mdp.num_states(); ++s)
    if (seen[s]) out.insert(out.end(), s);
  return out;
}

// Restriction of an MDP to a kept set; mass leaving the set is dropped.
class SubMdp {
 public:
  SubMdp(const Mdp& parent, StateSet kept) : parent_(&parent), kept_(std::move(kept)), mask_(parent.num_states(), 0) {
    for (StateId s : kept_) {
      if (s >= parent.num_states()) throw ContractViolation("kept state out of range");
      mask_[s] = 1;
    }
    if (!mask_[parent.initial()]) throw ContractViolation("kept set must contain the initial state");
  }

  const Mdp& parent() const { return *parent_; }
  const StateSet& kept() const { return kept_; }
  bool contains(StateId s) const { return s < mask_.size() && mask_[s]; }

  // Kept successors of one action, in stored order.
  std::vector<Transition> successors(StateId s, std::size_t local_action) const {
    std::vector<Transition> out;
    for (const auto& t : parent_->successors(s, local_action))
      if (mask_[t.target]) out.push_back(t);
    return out;
  }

 private:
  const Mdp* parent_;
  StateSet kept_;
  std::vector<char> mask_;
};

inline SubMdp induce_submdp(const Mdp& mdp, const StateSet& kept) { return SubMdp(mdp, kept); }

inline SubMdp induce_submdp(const SubMdp& sub, const StateSet& kept) {
  StateSet both;
  for (StateId s : kept)
    if (sub.contains(s)) both.insert(s);
  return SubMdp(sub.parent(), std::move(both));
}

}  // namespace pric3
