#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pric3/mdp.hpp"
#include "pric3/parser.hpp"
#include "pric3/state_space.hpp"

namespace testing_support {

using namespace pric3;

inline std::string models_dir() { return PRIC3_MODELS_DIR; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Mdp load_model(const std::string& name, const ConstantMap& consts = {}) {
  return build_state_space(parse_program(read_file(models_dir() + "/" + name), consts));
}

inline Probability q(const char* text) { return parse_rational(text); }

// The six-state running example; with_restart = false drops action b at s2.
inline Mdp running_example(bool with_restart = true, StateId initial = 0) {
  MdpBuilder b({{"s", 0, 5}});
  for (int s = 0; s < 6; ++s) b.add_state({s}, s == 5);
  b.set_initial(initial);
  b.name_action(0, "a");
  b.name_action(1, "b");
  b.add_action(0, 0, {{1, q("1/2")}, {2, q("1/2")}});
  b.add_action(1, 0, {{0, q("1/2")}, {3, q("1/2")}});
  b.add_action(2, 0, {{4, q("1/2")}, {5, q("1/2")}});
  if (with_restart) b.add_action(2, 1, {{0, q("1")}});
  b.add_action(3, 0, {{4, q("1/3")}, {5, q("2/3")}});
  b.add_action(4, 0, {{4, q("1")}});
  b.add_action(5, 0, {{5, q("1")}});
  return std::move(b).build();
}

struct RandomMdpShape {
  std::size_t min_states = 2;
  std::size_t max_states = 12;
  std::size_t max_actions = 3;
  std::size_t max_succ = 3;
  double bad_fraction = 0.15;
};

// Small random MDP with small-denominator probabilities. State 0 is initial.
inline Mdp random_mdp(std::mt19937_64& rng, const RandomMdpShape& shape = {}) {
  std::uniform_int_distribution<std::size_t> nd(shape.min_states, shape.max_states);
  const std::size_t n = nd(rng);
  std::bernoulli_distribution bad(shape.bad_fraction);
  MdpBuilder b({{"x", 0, static_cast<std::int64_t>(n - 1)}});
  for (std::size_t s = 0; s < n; ++s) b.add_state({static_cast<std::int64_t>(s)}, s != 0 && bad(rng));
  std::uniform_int_distribution<std::size_t> ad(1, shape.max_actions), sd(1, shape.max_succ), td(0, n - 1);
  std::uniform_int_distribution<int> wd(1, 4);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t acts = ad(rng);
    for (std::size_t a = 0; a < acts; ++a) {
      const std::size_t k = sd(rng);
      std::vector<std::pair<StateId, int>> picks;
      int total = 0;
      for (std::size_t j = 0; j < k; ++j) {
        int w = wd(rng);
        picks.push_back({static_cast<StateId>(td(rng)), w});
        total += w;
      }
      std::vector<std::pair<StateId, Probability>> dist;
      for (auto [t, w] : picks) dist.push_back({t, Probability(w, total)});
      for (auto& d : dist) d.second.canonicalize();
      b.add_action(static_cast<StateId>(s), static_cast<ActionId>(a), std::move(dist));
    }
  }
  return std::move(b).build();
}

}  // namespace testing_support
