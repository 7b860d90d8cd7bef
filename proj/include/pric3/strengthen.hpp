#pragma once

#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pric3/frames.hpp"
#include "pric3/generalize.hpp"
#include "pric3/heuristic.hpp"

namespace pric3 {

// Ancestor chain of an obligation: which (frame, state, action) spawned it.
struct HistoryNode {
  std::size_t frame;
  StateId state;
  std::size_t action;
  std::shared_ptr<const HistoryNode> parent;
};

struct Obligation {
  std::size_t frame = 0;
  StateId state = 0;
  Probability delta;
  std::shared_ptr<const HistoryNode> history;
};

// Pops the lowest frame index first (then the lowest state). Holds at most one
// obligation per (frame, state): the one with the smallest budget.
class ObligationQueue {
 public:
  // Returns true if the obligation is now live.
  bool push(Obligation ob) {
    touched_.insert(ob.state);
    auto key = std::make_pair(ob.frame, ob.state);
    auto it = live_.find(key);
    if (it != live_.end()) {
      if (it->second.delta <= ob.delta) return false;
      it->second = std::move(ob);
      return true;
    }
    live_.emplace(key, std::move(ob));
    return true;
  }

  Obligation pop() {
    if (live_.empty()) throw ContractViolation("pop from an empty obligation queue");
    auto node = live_.extract(live_.begin());
    return std::move(node.mapped());
  }

  bool empty() const { return live_.empty(); }
  std::size_t size() const { return live_.size(); }
  void touch(StateId s) { touched_.insert(s); }
  const StateSet& touched() const { return touched_; }

  std::optional<Probability> live_delta(std::size_t frame, StateId s) const {
    auto it = live_.find({frame, s});
    if (it == live_.end()) return std::nullopt;
    return it->second.delta;
  }

 private:
  std::map<std::pair<std::size_t, StateId>, Obligation> live_;
  StateSet touched_;
};

inline bool push_with_dominance(ObligationQueue& q, Obligation ob) { return q.push(std::move(ob)); }

enum class PushKind { Initial, Successor, Parent, Repush };

class StrengthenObserver {
 public:
  virtual ~StrengthenObserver() = default;
  virtual void on_begin(std::size_t /*k*/, const Probability& /*lambda*/) {}
  virtual void on_push(const Obligation&, PushKind) {}
  virtual void on_pop(const Obligation&) {}
  virtual void on_split(const Obligation&, std::size_t /*action*/, const std::vector<Probability>& /*split*/) {}
  virtual void on_resolve(const Obligation&) {}
  virtual void on_generalize(const Obligation&, const GroupConstraint&) {}
  virtual void on_cycle(const Obligation&, bool /*adapted*/) {}
  virtual void on_fail(const Obligation&, const std::string& /*reason*/) {}
};

// One line per event: "push <i> <s> <delta>", "pop ...", "resolve ...".
class TraceWriter : public StrengthenObserver {
 public:
  explicit TraceWriter(std::ostream& os) : os_(os) {}

  void on_begin(std::size_t k, const Probability& lambda) override {
    os_ << "strengthen k=" << k << " lambda=" << to_string(lambda) << "\n";
  }
  void on_push(const Obligation& ob, PushKind kind) override {
    os_ << "push " << line(ob);
    if (kind == PushKind::Repush) os_ << " repush";
    os_ << "\n";
  }
  void on_pop(const Obligation& ob) override { os_ << "pop " << line(ob) << "\n"; }
  void on_split(const Obligation& ob, std::size_t action, const std::vector<Probability>& split) override {
    os_ << "split " << line(ob) << " action " << action << " ->";
    for (const auto& d : split) os_ << " " << to_string(d);
    os_ << "\n";
  }
  void on_resolve(const Obligation& ob) override { os_ << "resolve " << line(ob) << "\n"; }
  void on_generalize(const Obligation& ob, const GroupConstraint& gc) override {
    os_ << "generalize " << line(ob) << " " << shape_name(gc.shape) << " var " << gc.dropped_var << "\n";
  }
  void on_cycle(const Obligation& ob, bool adapted) override {
    os_ << "cycle " << line(ob) << (adapted ? " adapted" : " abort") << "\n";
  }
  void on_fail(const Obligation& ob, const std::string& reason) override {
    os_ << "fail " << line(ob) << " " << reason << "\n";
  }

 private:
  static std::string line(const Obligation& ob) {
    return std::to_string(ob.frame) + " " + std::to_string(ob.state) + " " + to_string(ob.delta);
  }
  std::ostream& os_;
};

struct StrengthenOptions {
  bool repush = true;
  std::size_t max_obligations = 200'000'000;  // pops per call
  GeneralizeOptions generalize;
  StrengthenObserver* observer = nullptr;
};

struct StrengthenStats {
  std::size_t pops = 0;
  std::size_t pushes = 0;
  std::size_t resolves = 0;
  std::size_t adaptations = 0;
  GeneralizeStats generalize;
};

struct StrengthenResult {
  bool success = false;
  StateSet touched;
  std::string reason;  // why it failed
};

// Lowers F_1..F_k until F_k[s_I] <= lambda with relative inductivity restored, or
// reports the touched states as a potential counterexample.
inline StrengthenResult strengthen(FrameSeq& fs, const Mdp& mdp, const Probability& lambda, Heuristic& h,
                                   const StrengthenOptions& opt = {}, StrengthenStats* stats = nullptr) {
  StrengthenStats local;
  StrengthenStats& st = stats ? *stats : local;
  StrengthenObserver* obs = opt.observer;
  const std::size_t k = fs.top();
  if (obs) obs->on_begin(k, lambda);

  ObligationQueue q;
  auto push = [&](Obligation ob, PushKind kind) {
    // F_0 is fixed; an obligation it already meets needs no work.
    if (ob.frame == 0 && fs.value(0, ob.state) <= ob.delta) {
      q.touch(ob.state);
      return;
    }
    if (obs) obs->on_push(ob, kind);
    ++st.pushes;
    q.push(std::move(ob));
  };
  push({k, mdp.initial(), lambda, nullptr}, PushKind::Initial);
  q.touch(mdp.initial());

  std::map<std::tuple<std::size_t, StateId, std::size_t>, int> cycle_hits;
  auto fail = [&](const Obligation& ob, std::string why) {
    if (obs) obs->on_fail(ob, why);
    return StrengthenResult{false, q.touched(), std::move(why)};
  };

  while (!q.empty()) {
    Obligation ob = q.pop();
    ++st.pops;
    if (obs) obs->on_pop(ob);
    if (ob.frame == 0) return fail(ob, "frame 0 reached");
    if (mdp.is_bad(ob.state) && ob.delta < 1) return fail(ob, "bad state below 1");
    if (st.pops > opt.max_obligations)
      throw ResourceError("obligation budget of " + std::to_string(opt.max_obligations) + " exhausted");

    const auto prev = fs.view(ob.frame - 1);
    std::optional<std::size_t> violating;
    if (!(fs.value(ob.frame, ob.state) <= ob.delta))
      for (std::size_t a = 0; a < mdp.actions(ob.state).size(); ++a)
        if (bellman_action(mdp, prev, ob.state, a) > ob.delta) {
          violating = a;
          break;
        }

    if (violating) {
      const std::size_t a = *violating;
      for (auto node = ob.history; node; node = node->parent) {
        if (node->frame != ob.frame || node->state != ob.state || node->action != a) continue;
        // The obligation came back around; the successor that led here is the
        // one spawned right after the matching ancestor.
        StateId cycling = ob.state;
        for (auto n = ob.history; n && n != node; n = n->parent)
          if (n->parent == node) cycling = n->state;
        int& hits = cycle_hits[{ob.frame, ob.state, a}];
        ++hits;
        bool adapted = hits == 1 && h.adapt_local(mdp, ob.state, a, cycling);
        if (obs) obs->on_cycle(ob, adapted);
        if (!adapted) return fail(ob, "cycle");
        ++st.adaptations;
        break;
      }

      auto split = h.suggest(mdp, ob.state, a, ob.delta);
      if (!is_adequate(mdp, ob.state, a, ob.delta, split))
        throw InternalError("heuristic split is not adequate at state " + std::to_string(ob.state) + ", action " +
                            std::to_string(a) + ", budget " + to_string(ob.delta));
      if (obs) obs->on_split(ob, a, split);
      auto node = std::make_shared<const HistoryNode>(HistoryNode{ob.frame, ob.state, a, ob.history});
      auto succ = mdp.successors(ob.state, a);
      for (std::size_t j = 0; j < succ.size(); ++j)
        push({ob.frame - 1, succ[j].target, split[j], node}, PushKind::Successor);
      push(std::move(ob), PushKind::Parent);
      continue;
    }

    fs.update_min(ob.frame, ob.state, ob.delta);
    ++st.resolves;
    if (obs) obs->on_resolve(ob);
    if (opt.generalize.mode != GeneralizeMode::None && ob.delta < 1)
      if (auto gc = generalize(mdp, fs, ob.frame, ob.state, ob.delta, opt.generalize, &st.generalize)) {
        if (obs) obs->on_generalize(ob, *gc);
        fs.add_group(ob.frame, std::move(*gc));
      }
    if (opt.repush && ob.frame < k && bellman_apply(mdp, fs.view(ob.frame), ob.state) <= ob.delta) {
      ++ob.frame;
      push(std::move(ob), PushKind::Repush);
    }
  }
  return {true, q.touched(), {}};
}

}  // namespace pric3
