#pragma once

#include <chrono>
#include <functional>
#include <optional>

#include "pric3/strengthen.hpp"

namespace pric3 {

struct CoreOptions {
  std::size_t max_frames = 10'000;
  bool propagate = true;
  StrengthenOptions strengthen;
  // Called after each strengthening pass that succeeded, before a new frame is pushed.
  std::function<void(const FrameSeq&)> after_strengthen;
};

struct CoreStats {
  std::size_t iterations = 0;  // final k
  StrengthenStats strengthen;
  std::size_t propagated_points = 0;
  std::size_t lifted_groups = 0;
  double wall_ms = 0;
};

struct CoreResult {
  bool safe = false;
  std::optional<StateSet> subsystem;  // potential counterexample when not safe
  std::optional<FrameSeq> frames;     // the inductive frame sequence when safe
  bool zeno = false;                  // stopped because the subsystem repeated
};

// Copies F_i entries into F_{i+1} wherever that keeps relative inductivity.
inline void propagate(FrameSeq& fs, const Mdp& mdp, CoreStats* stats = nullptr) {
  for (std::size_t i = 1; i < fs.top(); ++i) {
    // Lifting and copying only touch F_{i+1} with values F_i already has, so F_i is fixed here.
    const auto view = fs.view(i);
    const MemoFrame<FrameSeq::View> here{&view};
    StateSet candidates(fs.states_at(i).begin(), fs.states_at(i).end());
    std::vector<std::uint32_t> lift;
    for (auto id : fs.groups_at(i)) {
      const auto& gc = fs.group(id);
      bool ok = true;
      for (auto t : mdp.line_members(gc.line))
        if (bellman_apply(mdp, here, t) > fs.group_value(id, mdp.valuation(t)[gc.dropped_var])) {
          ok = false;
          break;
        }
      if (ok) {
        lift.push_back(id);
      } else {
        for (auto t : mdp.line_members(gc.line)) candidates.insert(t);
      }
    }
    for (auto id : lift) {
      fs.lift_group(id);
      if (stats) ++stats->lifted_groups;
    }
    for (auto s : candidates) {
      const Probability& v = here.value(s);
      if (!(v < fs.value(i + 1, s))) continue;
      if (bellman_apply(mdp, here, s) <= v) {
        fs.update_min(i + 1, s, v);
        if (stats) ++stats->propagated_points;
      }
    }
  }
}

// The inner loop: strengthen, open a frame, propagate, look for a fixed point.
inline CoreResult pric3_h(const Mdp& mdp, const Probability& lambda, Heuristic& h, const CoreOptions& opt = {},
                          CoreStats* stats = nullptr) {
  if (lambda < 0 || lambda > 1) throw ContractViolation("threshold must lie in [0,1]");
  CoreStats local;
  CoreStats& st = stats ? *stats : local;
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&](CoreResult r) {
    st.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
  };

  FrameSeq fs(mdp);
  std::optional<StateSet> old_subsystem;
  for (;;) {
    st.iterations = fs.top();
    auto r = strengthen(fs, mdp, lambda, h, opt.strengthen, &st.strengthen);
    if (!r.success) return finish({false, std::move(r.touched), std::nullopt, false});
    if (opt.after_strengthen) opt.after_strengthen(fs);
    if (fs.top() >= opt.max_frames)
      throw ResourceError("frame limit of " + std::to_string(opt.max_frames) + " reached");
    fs.push_frame();
    if (opt.propagate) propagate(fs, mdp, &st);
    for (std::size_t i = 1; i < fs.top(); ++i)
      if (fs.frames_equal(i)) return finish({true, std::nullopt, std::move(fs), false});
    if (old_subsystem && *old_subsystem == r.touched) return finish({false, std::move(r.touched), std::nullopt, true});
    old_subsystem = std::move(r.touched);
  }
}

}  // namespace pric3
