#pragma once

#include <algorithm>
#include <concepts>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "pric3/group_constraint.hpp"
#include "pric3/mdp.hpp"

namespace pric3 {

template <class F>
concept FrameLike = requires(const F& f, StateId s) {
  { f.value(s) } -> std::convertible_to<Probability>;
};

// Read-through cache over a frame that stays fixed while the wrapper lives.
template <FrameLike F>
struct MemoFrame {
  const F* base;
  mutable std::unordered_map<StateId, Probability> memo{};

  const Probability& value(StateId s) const {
    auto it = memo.find(s);
    if (it == memo.end()) it = memo.emplace(s, base->value(s)).first;
    return it->second;
  }
};

template <class Q>
concept FrameSequence = requires(const Q& q, std::size_t i, StateId s) {
  { q.top() } -> std::convertible_to<std::size_t>;
  { q.value(i, s) } -> std::convertible_to<Probability>;
};

// Stand-alone frame: 1 by default, lowered by point and group bounds.
class Frame {
 public:
  static Frame fresh(const Mdp& mdp) { return Frame(mdp, false); }
  static Frame initial(const Mdp& mdp) { return Frame(mdp, true); }

  bool is_initial() const { return is_f0_; }
  const Mdp& mdp() const { return *mdp_; }

  Probability value(StateId s) const {
    if (is_f0_) return Probability(mdp_->is_bad(s) ? 1 : 0);
    Probability v(1);
    if (auto it = points_.find(s); it != points_.end() && it->second < v) v = it->second;
    for (const auto& g : groups_)
      if (auto b = eval_group_constraint(*mdp_, g, s); b && *b < v) v = *b;
    return v;
  }

  void set_point(StateId s, const Probability& p) {
    if (is_f0_) throw ContractViolation("the initial frame is fixed");
    if (p < 0 || p > 1) throw ContractViolation("frame values must lie in [0,1]");
    points_[s] = p;
  }
  void add_group(GroupConstraint gc) {
    if (is_f0_) throw ContractViolation("the initial frame is fixed");
    groups_.push_back(std::move(gc));
  }

  const std::map<StateId, Probability>& points() const { return points_; }
  const std::vector<GroupConstraint>& groups() const { return groups_; }

 private:
  Frame(const Mdp& mdp, bool f0) : mdp_(&mdp), is_f0_(f0) {}

  const Mdp* mdp_;
  bool is_f0_;
  std::map<StateId, Probability> points_;
  std::vector<GroupConstraint> groups_;
};

inline Probability frame_value(const Frame& f, StateId s) { return f.value(s); }

// Explicit list F_0..F_k, mainly for tests and for inspecting a result.
struct FrameList {
  std::vector<Frame> frames;
  std::size_t top() const { return frames.size() - 1; }
  Probability value(std::size_t i, StateId s) const { return frames.at(i).value(s); }
};

// Bellman operator restricted to one action, by position in the state's action list.
template <FrameLike F>
Probability bellman_action(const Mdp& mdp, const F& frame, StateId s, std::size_t local_action) {
  if (mdp.is_bad(s)) return Probability(1);
  Probability acc(0);
  for (const auto& t : mdp.successors(s, local_action)) acc += t.probability * frame.value(t.target);
  return acc;
}

template <FrameLike F>
Probability bellman_apply(const Mdp& mdp, const F& frame, StateId s) {
  if (mdp.is_bad(s)) return Probability(1);
  Probability best(0);
  for (std::size_t a = 0; a < mdp.actions(s).size(); ++a) {
    Probability v = bellman_action(mdp, frame, s, a);
    if (v > best) best = std::move(v);
  }
  return best;
}

// Operator restricted to a subset of action ids.
template <FrameLike F>
Probability bellman_apply(const Mdp& mdp, std::span<const ActionId> allowed, const F& frame, StateId s) {
  if (allowed.empty()) throw ContractViolation("empty action set");
  if (mdp.is_bad(s)) return Probability(1);
  Probability best(0);
  for (ActionId id : allowed) {
    Probability v = bellman_action(mdp, frame, s, action_position(mdp, s, id));
    if (v > best) best = std::move(v);
  }
  return best;
}

// F_0..F_k with F_0 = Phi(0) implicit. Point bounds use a staircase per state:
// entries (level, value) with ascending levels and strictly ascending values, and
// F_j[s] = smallest entry value with level >= j. Lowering F_1..F_i therefore
// touches one state's short list and the chain order holds by construction.
class FrameSeq {
 public:
  struct View {
    const FrameSeq* seq;
    std::size_t level;
    Probability value(StateId s) const { return seq->value(level, s); }
  };

  explicit FrameSeq(const Mdp& mdp) : mdp_(&mdp), points_(mdp.num_states()), states_at_(2), groups_at_(2) {}

  const Mdp& mdp() const { return *mdp_; }
  std::size_t top() const { return top_; }
  View view(std::size_t i) const { return {this, i}; }

  void push_frame() {
    ++top_;
    states_at_.emplace_back();
    groups_at_.emplace_back();
  }

  Probability value(std::size_t i, StateId s) const {
    if (i == 0) return Probability(mdp_->is_bad(s) ? 1 : 0);
    const Probability* best = &one_probability();
    const auto& e = points_[s];
    auto it = std::lower_bound(e.begin(), e.end(), i, [](const Entry& x, std::size_t lvl) { return x.level < lvl; });
    if (it != e.end()) best = &it->value;
    if (groups_.empty()) return *best;
    Probability v = *best;
    for (std::size_t var = 0; var < mdp_->num_vars(); ++var) {
      auto g = by_line_.find(mdp_->line_of(s, var));
      if (g == by_line_.end()) continue;
      for (auto id : g->second) {
        const auto& sg = groups_[id];
        if (sg.level < i) continue;
        const Probability& b = sg.at(mdp_->valuation(s)[sg.gc.dropped_var]);
        if (b < v) v = b;
      }
    }
    return v;
  }

  // Point bound only, ignoring groups.
  Probability point_value(std::size_t i, StateId s) const {
    if (i == 0) return Probability(mdp_->is_bad(s) ? 1 : 0);
    const auto& e = points_[s];
    auto it = std::lower_bound(e.begin(), e.end(), i, [](const Entry& x, std::size_t lvl) { return x.level < lvl; });
    return it == e.end() ? Probability(1) : it->value;
  }

  // F_j[s] <- min(F_j[s], delta) for 1 <= j <= i.
  void update_min(std::size_t i, StateId s, const Probability& delta) {
    if (i == 0) throw ContractViolation("the initial frame is never updated");
    if (i > top_) throw ContractViolation("frame index beyond the top frame");
    if (delta < 0 || delta > 1) throw ContractViolation("frame values must lie in [0,1]");
    auto& e = points_[s];
    auto it = std::lower_bound(e.begin(), e.end(), i, [](const Entry& x, std::size_t lvl) { return x.level < lvl; });
    if (it != e.end() && it->value <= delta) return;
    std::vector<Entry> next;
    next.reserve(e.size() + 1);
    for (auto p = e.begin(); p != it; ++p) {
      if (p->value < delta) next.push_back(*p);
      else states_at_[p->level].erase(s);
    }
    next.push_back({i, delta});
    states_at_[i].insert(s);
    for (auto p = it; p != e.end(); ++p) {
      if (p->level == i) continue;
      next.push_back(*p);
    }
    e = std::move(next);
  }

  // Adds gc to F_1..F_i unless an existing constraint already implies it.
  // Returns false when nothing was added.
  bool add_group(std::size_t i, GroupConstraint gc) {
    if (i == 0) throw ContractViolation("the initial frame is never updated");
    if (i > top_) throw ContractViolation("frame index beyond the top frame");
    auto& ids = by_line_[gc.line];
    auto members = mdp_->line_members(gc.line);
    StoredGroup fresh{std::move(gc), i, true, {}};
    auto below = [&](const StoredGroup& a, const StoredGroup& b) {
      for (auto t : members) {
        auto x = mdp_->valuation(t)[fresh.gc.dropped_var];
        if (a.at(x) > b.at(x)) return false;
      }
      return true;
    };
    for (auto id : ids)
      if (groups_[id].level >= i && below(groups_[id], fresh)) return false;
    std::erase_if(ids, [&](std::uint32_t id) {
      if (groups_[id].level <= i && below(fresh, groups_[id])) {
        groups_at_[groups_[id].level].erase(id);
        groups_[id].alive = false;
        groups_[id].memo.clear();
        return true;
      }
      return false;
    });
    auto id = static_cast<std::uint32_t>(groups_.size());
    groups_.push_back(std::move(fresh));
    ids.push_back(id);
    groups_at_[i].insert(id);
    return true;
  }

  // States whose staircase has an entry at exactly level i.
  const std::set<StateId>& states_at(std::size_t i) const { return states_at_.at(i); }
  // Live group constraints whose highest frame is exactly i.
  const std::set<std::uint32_t>& groups_at(std::size_t i) const { return groups_at_.at(i); }
  const GroupConstraint& group(std::uint32_t id) const { return groups_[id].gc; }
  // Clamped bound of a group at x, memoized.
  const Probability& group_value(std::uint32_t id, std::int64_t x) const { return groups_[id].at(x); }

  // Moves a group constraint from F_1..F_i to F_1..F_{i+1}.
  void lift_group(std::uint32_t id) {
    auto& g = groups_[id];
    if (g.level >= top_) throw ContractViolation("cannot lift beyond the top frame");
    groups_at_[g.level].erase(id);
    ++g.level;
    groups_at_[g.level].insert(id);
  }

  // Extensional F_i == F_{i+1}; only states constrained at exactly level i can differ.
  bool frames_equal(std::size_t i) const {
    if (i >= top_) throw ContractViolation("no frame above the compared one");
    if (i == 0) {
      for (StateId s = 0; s < mdp_->num_states(); ++s)
        if (value(0, s) != value(1, s)) return false;
      return true;
    }
    for (auto s : states_at_[i])
      if (value(i, s) != value(i + 1, s)) return false;
    for (auto id : groups_at_[i])
      for (auto t : mdp_->line_members(groups_[id].gc.line))
        if (value(i, t) != value(i + 1, t)) return false;
    return true;
  }

  std::size_t num_groups() const {
    return static_cast<std::size_t>(std::count_if(groups_.begin(), groups_.end(), [](const auto& g) { return g.alive; }));
  }

  Frame materialize(std::size_t i) const {
    if (i == 0) return Frame::initial(*mdp_);
    Frame f = Frame::fresh(*mdp_);
    for (StateId s = 0; s < mdp_->num_states(); ++s) {
      auto p = point_value(i, s);
      if (p < 1) f.set_point(s, p);
    }
    for (const auto& g : groups_)
      if (g.alive && g.level >= i) f.add_group(g.gc);
    return f;
  }

 private:
  struct Entry {
    std::size_t level;
    Probability value;
  };
  struct StoredGroup {
    GroupConstraint gc;
    std::size_t level;
    bool alive;
    mutable std::unordered_map<std::int64_t, Probability> memo;

    const Probability& at(std::int64_t x) const {
      auto it = memo.find(x);
      if (it == memo.end()) it = memo.emplace(x, gc.value_at(x)).first;
      return it->second;
    }
  };

  const Mdp* mdp_;
  std::size_t top_ = 1;
  std::vector<std::vector<Entry>> points_;
  std::vector<std::set<StateId>> states_at_;
  std::vector<std::set<std::uint32_t>> groups_at_;
  std::vector<StoredGroup> groups_;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> by_line_;
};

inline void update_min(FrameSeq& fs, std::size_t i, StateId s, const Probability& delta) { fs.update_min(i, s, delta); }

// Phi^{n+1}(0), all states.
inline std::vector<Probability> bounded_reach_all(const Mdp& mdp, std::size_t n) {
  std::vector<Probability> x(mdp.num_states(), Probability(0));
  struct VecFrame {
    const std::vector<Probability>* v;
    const Probability& value(StateId s) const { return (*v)[s]; }
  };
  for (std::size_t k = 0; k <= n; ++k) {
    std::vector<Probability> y(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s) y[s] = bellman_apply(mdp, VecFrame{&x}, s);
    if (y == x) break;
    x = std::move(y);
  }
  return x;
}

inline Probability bounded_reach(const Mdp& mdp, StateId s, std::size_t n) { return bounded_reach_all(mdp, n).at(s); }

struct InvariantReport {
  struct Item {
    bool ok = true;
    std::optional<StateId> witness;
    std::size_t frame = 0;
  };
  Item initiality;
  Item chain;
  Item safety;
  Item inductivity;

  bool all() const { return initiality.ok && chain.ok && safety.ok && inductivity.ok; }
};

// Checks the four frame invariants over F_0..F_top.
template <FrameSequence Q>
InvariantReport check_pric3_inv(const Q& fs, const Mdp& mdp, const Probability& lambda) {
  InvariantReport r;
  const std::size_t k = fs.top();
  auto fail = [](InvariantReport::Item& item, std::size_t i, StateId s) {
    if (!item.ok) return;
    item.ok = false;
    item.frame = i;
    item.witness = s;
  };
  struct Level {
    const Q* q;
    std::size_t i;
    Probability value(StateId s) const { return q->value(i, s); }
  };
  for (StateId s = 0; s < mdp.num_states(); ++s)
    if (fs.value(0, s) != (mdp.is_bad(s) ? 1 : 0)) fail(r.initiality, 0, s);
  for (std::size_t i = 0; i <= k; ++i) {
    if (fs.value(i, mdp.initial()) > lambda) fail(r.safety, i, mdp.initial());
    if (i == k) break;
    for (StateId s = 0; s < mdp.num_states(); ++s) {
      Probability next = fs.value(i + 1, s);
      if (fs.value(i, s) > next) fail(r.chain, i, s);
      if (bellman_apply(mdp, Level{&fs, i}, s) > next) fail(r.inductivity, i, s);
    }
  }
  return r;
}

// The first `top + 1` frames of a longer sequence.
template <FrameSequence Q>
struct FramePrefix {
  const Q* seq;
  std::size_t last;
  std::size_t top() const { return last; }
  Probability value(std::size_t i, StateId s) const { return seq->value(i, s); }
};

}  // namespace pric3
