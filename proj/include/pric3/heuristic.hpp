#pragma once

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "pric3/mdp.hpp"
#include "pric3/oracle.hpp"

namespace pric3 {

inline constexpr unsigned long kOracleDenominator = 1'000'000;

// Splits an obligation's budget over the successors of one action.
class Heuristic {
 public:
  enum class Kind { OracleRatio, Zero };

  static Heuristic from_oracle(const Oracle& oracle) {
    auto w = std::make_shared<std::vector<Probability>>(oracle.values.size());
    for (std::size_t s = 0; s < w->size(); ++s)
      (*w)[s] = limit_denominator(clamp01(oracle.values[s]), kOracleDenominator);
    Heuristic h(Kind::OracleRatio);
    h.weights_ = std::move(w);
    return h;
  }

  static Heuristic zero() { return Heuristic(Kind::Zero); }

  Kind kind() const { return kind_; }
  const Probability& weight(StateId s) const { return weights_ ? (*weights_)[s] : zero_probability(); }

  // One value per successor of the action, aligned with the stored successor order.
  std::vector<Probability> suggest(const Mdp& mdp, StateId s, std::size_t action, const Probability& delta) const {
    auto succ = mdp.successors(s, action);
    std::vector<Probability> x(succ.size(), Probability(0));
    Probability bad_mass(0);
    for (const auto& t : succ)
      if (mdp.is_bad(t.target)) bad_mass += t.probability;

    if (bad_mass > delta) {
      Probability share = delta / bad_mass;
      for (std::size_t j = 0; j < succ.size(); ++j)
        if (mdp.is_bad(succ[j].target)) x[j] = share;
      return x;
    }
    for (std::size_t j = 0; j < succ.size(); ++j)
      if (mdp.is_bad(succ[j].target)) x[j] = 1;
    if (kind_ == Kind::Zero || delta == 0) return x;

    std::vector<std::size_t> free;
    std::vector<Probability> w(succ.size());
    bool any_positive = false;
    for (std::size_t j = 0; j < succ.size(); ++j) {
      if (mdp.is_bad(succ[j].target)) continue;
      free.push_back(j);
      w[j] = weight(succ[j].target);
      any_positive = any_positive || w[j] > 0;
    }
    if (!any_positive)
      for (auto j : free) w[j] = Probability(1, 2);

    // Scale the weights to use the whole remaining budget; successors that would
    // exceed 1 are pinned at 1 and the rest is rescaled.
    Probability rest = delta - bad_mass;
    while (!free.empty()) {
      Probability mass(0);
      for (auto j : free) mass += succ[j].probability * w[j];
      if (mass == 0) break;
      Probability c = rest / mass;
      std::vector<std::size_t> keep;
      bool clamped = false;
      for (auto j : free) {
        if (c * w[j] > 1) {
          x[j] = 1;
          rest -= succ[j].probability;
          clamped = true;
        } else {
          keep.push_back(j);
        }
      }
      if (!clamped) {
        for (auto j : free) x[j] = c * w[j];
        break;
      }
      free = std::move(keep);
    }

    if (auto it = overrides_.find({s, action}); it != overrides_.end()) shift_towards(succ, mdp, it->second, x);
    // Exact ratios grow without bound along long paths; rounding down keeps the
    // split adequate.
    for (std::size_t j = 0; j < succ.size(); ++j)
      if (!mdp.is_bad(succ[j].target)) x[j] = round_down_bits(x[j]);
    return x;
  }

  // One-shot local change after a cycle through successor `cycling` of (s, action):
  // the other non-bad successors give up half of their budget to it.
  // Returns false if (s, action) was adapted before.
  bool adapt_local(const Mdp& mdp, StateId s, std::size_t action, StateId cycling) {
    if (overrides_.count({s, action})) return false;
    auto succ = mdp.successors(s, action);
    for (std::size_t j = 0; j < succ.size(); ++j)
      if (succ[j].target == cycling) {
        overrides_[{s, action}] = j;
        return true;
      }
    throw ContractViolation("cycling state is not a successor");
  }

  bool adapted(StateId s, std::size_t action) const { return overrides_.count({s, action}) != 0; }

 private:
  explicit Heuristic(Kind k) : kind_(k) {}

  static void shift_towards(std::span<const Transition> succ, const Mdp& mdp, std::size_t target,
                            std::vector<Probability>& x) {
    if (mdp.is_bad(succ[target].target)) return;
    Probability freed(0);
    for (std::size_t j = 0; j < succ.size(); ++j) {
      if (j == target || mdp.is_bad(succ[j].target)) continue;
      Probability half = x[j] / 2;
      freed += succ[j].probability * half;
      x[j] -= half;
    }
    Probability raised = x[target] + freed / succ[target].probability;
    x[target] = raised > 1 ? Probability(1) : raised;
  }

  Kind kind_;
  std::shared_ptr<const std::vector<Probability>> weights_;
  std::map<std::pair<StateId, std::size_t>, std::size_t> overrides_;
};

inline Heuristic make_h0() { return Heuristic::zero(); }

// Weighted successor sum stays within the budget.
inline bool is_adequate(const Mdp& mdp, StateId s, std::size_t action, const Probability& delta,
                        const std::vector<Probability>& split) {
  auto succ = mdp.successors(s, action);
  if (split.size() != succ.size()) return false;
  Probability acc(0);
  for (std::size_t j = 0; j < succ.size(); ++j) {
    if (split[j] < 0 || split[j] > 1) return false;
    acc += succ[j].probability * split[j];
  }
  return acc <= delta;
}

}  // namespace pric3
