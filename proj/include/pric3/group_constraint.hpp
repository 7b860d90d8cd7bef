#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pric3/mdp.hpp"

namespace pric3 {

enum class GroupShape { Constant, Linear, Polynomial, PiecewiseLinear };

inline const char* shape_name(GroupShape s) {
  switch (s) {
    case GroupShape::Constant: return "constant";
    case GroupShape::Linear: return "linear";
    case GroupShape::Polynomial: return "polynomial";
    case GroupShape::PiecewiseLinear: return "piecewise-linear";
  }
  return "?";
}

// Upper bound p(x) on all states of one line (states equal to the anchor except in
// the dropped variable x).
//   Constant:        ys = {c}
//   Linear:          line through (xs[0], ys[0]) and (xs[1], ys[1])
//   Polynomial:      Newton form with nodes xs and divided differences ys
//   PiecewiseLinear: breakpoints (xs[k], ys[k]), xs ascending; flat beyond the ends
struct GroupConstraint {
  StateId anchor = 0;
  std::size_t dropped_var = 0;
  std::uint32_t line = 0;
  GroupShape shape = GroupShape::Constant;
  std::vector<Probability> xs;
  std::vector<Probability> ys;

  Probability raw(std::int64_t x) const {
    const Probability X(x);
    switch (shape) {
      case GroupShape::Constant: return ys.at(0);
      case GroupShape::Linear: return ys[0] + (ys[1] - ys[0]) * (X - xs[0]) / (xs[1] - xs[0]);
      case GroupShape::Polynomial: {
        if (!integral_nodes()) {
          Probability acc = ys.back();
          for (std::size_t k = ys.size() - 1; k-- > 0;) acc = ys[k] + (X - xs[k]) * acc;
          return acc;
        }
        // Horner over a common denominator, reduced once at the end.
        const auto& [den, num] = scaled();
        mpz_class acc = num.back(), step;
        for (std::size_t k = num.size() - 1; k-- > 0;) {
          step = x - xs[k].get_num();
          acc *= step;
          acc += num[k];
        }
        Probability out(acc, den);
        out.canonicalize();
        return out;
      }
      case GroupShape::PiecewiseLinear: {
        if (X <= xs.front()) return ys.front();
        if (X >= xs.back()) return ys.back();
        std::size_t k = 1;
        while (xs[k] < X) ++k;
        return ys[k - 1] + (ys[k] - ys[k - 1]) * (X - xs[k - 1]) / (xs[k] - xs[k - 1]);
      }
    }
    return Probability(1);
  }

  Probability value_at(std::int64_t x) const { return clamp01(raw(x)); }

 private:
  mutable std::optional<std::pair<mpz_class, std::vector<mpz_class>>> scaled_;

  bool integral_nodes() const {
    return std::all_of(xs.begin(), xs.end(), [](const Probability& v) { return v.get_den() == 1; });
  }
  const std::pair<mpz_class, std::vector<mpz_class>>& scaled() const {
    if (!scaled_) {
      mpz_class den = 1;
      for (const auto& y : ys) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), y.get_den_mpz_t());
      std::vector<mpz_class> num;
      num.reserve(ys.size());
      for (const auto& y : ys) num.push_back(y.get_num() * (den / y.get_den()));
      scaled_.emplace(std::move(den), std::move(num));
    }
    return *scaled_;
  }

 public:

  bool covers(const Mdp& mdp, StateId s) const { return mdp.line_of(s, dropped_var) == line; }
};

inline GroupConstraint make_group(const Mdp& mdp, StateId anchor, std::size_t var, GroupShape shape,
                                  std::vector<Probability> xs, std::vector<Probability> ys) {
  GroupConstraint gc;
  gc.anchor = anchor;
  gc.dropped_var = var;
  gc.line = mdp.line_of(anchor, var);
  gc.shape = shape;
  gc.xs = std::move(xs);
  gc.ys = std::move(ys);
  return gc;
}

// Clamped bound at s, or nothing when s is not on the constraint's line.
inline std::optional<Probability> eval_group_constraint(const Mdp& mdp, const GroupConstraint& gc, StateId s) {
  if (!gc.covers(mdp, s)) return std::nullopt;
  return gc.value_at(mdp.valuation(s)[gc.dropped_var]);
}

inline std::string describe(const Mdp& mdp, const GroupConstraint& gc) {
  std::string out = std::string(shape_name(gc.shape)) + " over " + mdp.variables()[gc.dropped_var].name + " at state " +
                    std::to_string(gc.anchor) + ":";
  for (std::size_t k = 0; k < gc.ys.size(); ++k)
    out += " " + (k < gc.xs.size() ? to_string(gc.xs[k]) + "->" : std::string()) + to_string(gc.ys[k]);
  return out;
}

}  // namespace pric3
