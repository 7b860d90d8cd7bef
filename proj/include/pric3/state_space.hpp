#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pric3/mdp.hpp"
#include "pric3/program.hpp"

namespace pric3 {

struct StateSpaceOptions {
  std::size_t max_states = 5'000'000;
};

// Breadth-first enumeration from the initial valuation. Action ids are command
// indices. Bad states are absorbing and are not expanded.
inline Mdp build_state_space(const ProgramModel& model, const StateSpaceOptions& options = {}) {
  std::vector<VariableInfo> vars;
  std::vector<std::int64_t> init;
  for (const auto& v : model.variables) {
    vars.push_back({v.name, v.lower, v.upper});
    init.push_back(v.init);
  }
  if (!model.bad_label) throw ModelError("missing label \"bad\"");

  MdpBuilder builder(vars);
  std::unordered_map<std::vector<std::int64_t>, StateId, ValuationHash> index;
  std::vector<std::vector<std::int64_t>> queue;

  auto intern = [&](const std::vector<std::int64_t>& val) -> StateId {
    auto it = index.find(val);
    if (it != index.end()) return it->second;
    if (index.size() >= options.max_states)
      throw ResourceError("state space exceeds the limit of " + std::to_string(options.max_states) + " states");
    StateId id = builder.add_state(val, eval_int(*model.bad_label, val) != 0);
    index.emplace(val, id);
    queue.push_back(val);
    return id;
  };

  for (std::size_t c = 0; c < model.commands.size(); ++c)
    if (!model.commands[c].action.empty()) builder.name_action(static_cast<ActionId>(c), model.commands[c].action);

  intern(init);
  builder.set_initial(0);
  std::vector<std::int64_t> next;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::vector<std::int64_t> val = queue[head];
    const StateId s = static_cast<StateId>(head);
    if (eval_int(*model.bad_label, val) != 0) continue;
    for (std::size_t c = 0; c < model.commands.size(); ++c) {
      const auto& cmd = model.commands[c];
      if (eval_int(*cmd.guard, val) == 0) continue;
      std::vector<std::pair<StateId, Probability>> dist;
      for (const auto& br : cmd.branches) {
        next = val;
        for (const auto& u : br.updates) {
          if (u.var_index < 0)
            throw ModelError("update of undeclared variable '" + u.target + "'", u.loc.line, u.loc.column);
          auto x = eval_int(*u.value, val);
          const auto& v = model.variables[static_cast<std::size_t>(u.var_index)];
          if (x < v.lower || x > v.upper)
            throw ModelError("update sets '" + v.name + "' to " + std::to_string(x) + " outside [" +
                                 std::to_string(v.lower) + ".." + std::to_string(v.upper) + "]",
                             u.loc.line, u.loc.column);
          next[static_cast<std::size_t>(u.var_index)] = x;
        }
        dist.emplace_back(intern(next), br.probability);
      }
      builder.add_action(s, static_cast<ActionId>(c), std::move(dist));
    }
  }
  return std::move(builder).build();
}

}  // namespace pric3
