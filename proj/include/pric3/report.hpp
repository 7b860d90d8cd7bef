#pragma once

#include <string>

#include <json.hpp>

#include "pric3/checker.hpp"

namespace pric3 {

struct RunInfo {
  std::string engine = "pric3";
  std::string oracle;
  std::string generalize;
  std::size_t states = 0;
};

// Machine-readable summary of one run. Probabilities are exact rational strings.
inline nlohmann::ordered_json verdict_json(const Verdict& v, const RunInfo& info) {
  nlohmann::ordered_json j;
  const auto& st = v.stats;
  j["verdict"] = v.safe ? "safe" : "unsafe";
  j["lambda"] = to_string(v.lambda);
  j["states"] = info.states;
  j["outer_iters"] = st.outer_iterations;
  j["core_iters"] = st.core_iterations;
  j["obligations"] = st.obligations;
  j["generalizations_ok"] = st.generalizations_ok;
  j["submdp_max_size"] = st.submdp_max_size;
  j["refutation_calls"] = st.refutation_calls;
  j["wall_ms"] = st.wall_ms;
  j["engine"] = info.engine;
  j["reason"] = info.engine == "exact" ? std::string("exact") : std::string(reason_name(v.reason));
  j["probability"] = v.probability ? nlohmann::ordered_json(to_string(*v.probability)) : nlohmann::ordered_json();
  j["probability_exact"] = v.exact;
  if (info.engine != "exact") {
    j["oracle"] = info.oracle;
    j["generalize"] = info.generalize;
    j["generalizations_tried"] = st.generalizations_tried;
    j["zeno_stops"] = st.zeno_stops;
    j["cores_reused"] = st.cores_reused;
    j["oracle_ms"] = st.oracle_ms;
    auto cores = nlohmann::ordered_json::array();
    for (const auto& c : st.cores) {
      nlohmann::ordered_json cj;
      cj["iterations"] = c.iterations;
      cj["obligations"] = c.obligations;
      cj["subsystem_size"] = c.subsystem_size;
      cj["safe"] = c.safe;
      cj["zeno"] = c.zeno;
      cj["wall_ms"] = c.wall_ms;
      cores.push_back(std::move(cj));
    }
    j["cores"] = std::move(cores);
  }
  return j;
}

}  // namespace pric3
