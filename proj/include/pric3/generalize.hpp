#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pric3/frames.hpp"
#include "pric3/group_constraint.hpp"

namespace pric3 {

enum class GeneralizeMode { None, Constant, Linear, Polynomial, Hybrid };

inline const char* mode_name(GeneralizeMode m) {
  switch (m) {
    case GeneralizeMode::None: return "none";
    case GeneralizeMode::Constant: return "constant";
    case GeneralizeMode::Linear: return "linear";
    case GeneralizeMode::Polynomial: return "polynomial";
    case GeneralizeMode::Hybrid: return "hybrid";
  }
  return "?";
}

inline GeneralizeMode parse_generalize_mode(const std::string& s) {
  if (s == "none") return GeneralizeMode::None;
  if (s == "constant") return GeneralizeMode::Constant;
  if (s == "linear") return GeneralizeMode::Linear;
  if (s == "polynomial") return GeneralizeMode::Polynomial;
  if (s == "hybrid") return GeneralizeMode::Hybrid;
  throw ContractViolation("unknown generalization mode '" + s + "'");
}

struct GeneralizeOptions {
  GeneralizeMode mode = GeneralizeMode::None;
  std::size_t max_degree = 4;
};

struct GeneralizeStats {
  std::size_t attempts = 0;
  std::size_t accepted = 0;
  std::size_t ctgs = 0;
};

struct GroupCheck {
  bool ok = true;
  StateId witness = 0;
  Probability witness_value;  // operator value at the witness, without the candidate
};

// Frame `prev` additionally bounded by gc on its line.
template <FrameLike F>
struct ConstrainedFrame {
  const Mdp* mdp;
  const F* prev;
  const GroupConstraint* gc;
  mutable std::unordered_map<std::int64_t, Probability> memo{};

  const Probability& bound(std::int64_t x) const {
    auto it = memo.find(x);
    if (it == memo.end()) it = memo.emplace(x, gc->value_at(x)).first;
    return it->second;
  }
  Probability value(StateId s) const {
    Probability v = prev->value(s);
    if (gc->covers(*mdp, s)) {
      const Probability& b = bound(mdp->valuation(s)[gc->dropped_var]);
      if (b < v) return b;
    }
    return v;
  }
};

// Every state t of the line must satisfy Phi(prev ∧ gc)[t] <= gc(t). When prev is
// F_0 the constraint does not enter F_0, so pass constrain_prev = false.
// States in `first` are checked before the rest.
template <FrameLike F>
GroupCheck check_group_inductive(const Mdp& mdp, const F& prev, const GroupConstraint& gc, bool constrain_prev = true,
                                 const std::vector<StateId>& first = {}) {
  ConstrainedFrame<F> with{&mdp, &prev, &gc};
  auto test = [&](StateId t, GroupCheck& out) {
    const Probability& bound = with.bound(mdp.valuation(t)[gc.dropped_var]);
    Probability phi = constrain_prev ? bellman_apply(mdp, with, t) : bellman_apply(mdp, prev, t);
    if (phi <= bound) return true;
    out.ok = false;
    out.witness = t;
    out.witness_value = constrain_prev ? bellman_apply(mdp, prev, t) : phi;
    return false;
  };
  GroupCheck out;
  for (auto t : first)
    if (gc.covers(mdp, t) && !test(t, out)) return out;
  for (auto t : mdp.line_members(gc.line))
    if (!test(t, out)) return out;
  return out;
}

namespace detail {

inline std::vector<Probability> divided_differences(const std::vector<Probability>& xs, std::vector<Probability> ys) {
  const std::size_t n = xs.size();
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t j = n - 1; j >= k; --j) ys[j] = (ys[j] - ys[j - 1]) / (xs[j] - xs[j - k]);
  return ys;
}

// Upper concave hull of the polynomial sampled at the given integer points.
inline GroupConstraint upper_hull(const Mdp& mdp, const GroupConstraint& poly) {
  std::vector<std::pair<Probability, Probability>> pts;
  for (auto t : mdp.line_members(poly.line)) {
    auto x = mdp.valuation(t)[poly.dropped_var];
    pts.emplace_back(Probability(x), poly.raw(x));
  }
  std::vector<std::pair<Probability, Probability>> hull;
  for (auto& p : pts) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      // drop b when it lies on or below segment a-p
      if ((b.first - a.first) * (p.second - a.second) - (b.second - a.second) * (p.first - a.first) >= 0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  GroupConstraint gc = poly;
  gc.shape = GroupShape::PiecewiseLinear;
  gc.xs.clear();
  gc.ys.clear();
  for (auto& [x, y] : hull) {
    gc.xs.push_back(x);
    gc.ys.push_back(y);
  }
  return gc;
}

}  // namespace detail

// Tries to bound the whole line through s (one variable dropped) instead of s alone.
// The obligation (i, s, delta) has just been resolved in fs.
inline std::optional<GroupConstraint> generalize(const Mdp& mdp, const FrameSeq& fs, std::size_t i, StateId s,
                                                 const Probability& delta, const GeneralizeOptions& opt,
                                                 GeneralizeStats* stats = nullptr) {
  if (opt.mode == GeneralizeMode::None || i == 0 || mdp.is_bad(s)) return std::nullopt;
  const auto prev_view = fs.view(i - 1);
  const MemoFrame<FrameSeq::View> prev{&prev_view};
  const bool constrain_prev = i > 1;
  std::vector<StateId> hints;
  auto check = [&](const GroupConstraint& gc) {
    auto r = check_group_inductive(mdp, prev, gc, constrain_prev, hints);
    if (!r.ok) hints.push_back(r.witness);
    return r;
  };

  for (std::size_t v = 0; v < mdp.num_vars(); ++v) {
    const auto line = mdp.line_of(s, v);
    const auto members = mdp.line_members(line);
    if (members.size() < 2) continue;
    if (stats) ++stats->attempts;
    hints.clear();
    const auto xs_anchor = mdp.valuation(s)[v];

    if (opt.mode == GeneralizeMode::Constant) {
      auto gc = make_group(mdp, s, v, GroupShape::Constant, {}, {delta});
      if (check(gc).ok) {
        if (stats) ++stats->accepted;
        return gc;
      }
      continue;
    }

    // Interpolating shapes need one command in charge of the anchor.
    auto acts = mdp.actions(s);
    if (acts.size() != 1 || acts[0].id == kDeadlockAction) continue;
    const ActionId cmd = acts[0].id;
    std::optional<StateId> far;
    for (auto t : members) {
      if (t == s || mdp.valuation(t)[v] <= xs_anchor) continue;
      for (const auto& a : mdp.actions(t))
        if (a.id == cmd) far = t;
    }
    if (!far)
      for (auto t : members) {
        if (t == s) continue;
        for (const auto& a : mdp.actions(t))
          if (a.id == cmd) far = t;
      }
    if (!far) continue;

    std::vector<Probability> xs{Probability(xs_anchor), Probability(mdp.valuation(*far)[v])};
    std::vector<Probability> ys{delta, clamp01(bellman_apply(mdp, prev, *far))};
    auto line_gc = make_group(mdp, s, v, GroupShape::Linear, xs, ys);
    auto first = check(line_gc);
    if (first.ok) {
      if (stats) ++stats->accepted;
      return line_gc;
    }
    if (opt.mode == GeneralizeMode::Linear) continue;

    // Add counterexamples as interpolation nodes until the bound holds or the degree cap is hit.
    GroupCheck failure = first;
    std::optional<GroupConstraint> poly;
    while (xs.size() <= opt.max_degree) {
      Probability wx(mdp.valuation(failure.witness)[v]);
      if (std::find(xs.begin(), xs.end(), wx) != xs.end()) break;
      if (stats) ++stats->ctgs;
      xs.push_back(wx);
      ys.push_back(clamp01(failure.witness_value));
      // Newton form needs the original values, not the previous coefficients.
      auto gc = make_group(mdp, s, v, GroupShape::Polynomial, xs, detail::divided_differences(xs, ys));
      auto r = check(gc);
      if (r.ok) {
        poly = gc;
        break;
      }
      failure = r;
    }
    if (!poly) continue;
    if (opt.mode == GeneralizeMode::Hybrid) {
      auto hull = detail::upper_hull(mdp, *poly);
      if (hull.value_at(xs_anchor) <= delta && check(hull).ok) {
        if (stats) ++stats->accepted;
        return hull;
      }
    }
    if (stats) ++stats->accepted;
    return poly;
  }
  return std::nullopt;
}

}  // namespace pric3
