#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "pric3/errors.hpp"
#include "pric3/rational.hpp"

namespace pric3 {

namespace detail {

inline void require_open_unit(const char* name, const Probability& p) {
  if (p <= 0 || p >= 1)
    throw ModelError(std::string("probability-range: ") + name + " = " + to_string(p) + " must lie strictly between 0 and 1");
}

inline std::string paren(const Probability& p) { return "(" + to_string(p) + ")"; }

}  // namespace detail

// Chain of N steps, each advancing with probability p and failing otherwise.
inline std::string generate_chain(std::int64_t n, const Probability& p) {
  if (n < 1) throw ModelError("range: N = " + std::to_string(n) + " must be at least 1");
  detail::require_open_unit("p", p);
  const std::string N = std::to_string(n), P = detail::paren(p);
  return "module chain\n"
         "c : [0.." + N + "] init 0;   f : [0..1] init 0;\n"
         "[] c<" + N + "-> " + P + ":(c'=c+1) + (1-" + P + "):(f'=1); \n"
         "endmodule\n"
         "label bad = f'=1\n";
}

// Two coupled chains; p1 + p2 + p3 must be 1.
inline std::string generate_double_chain(std::int64_t n, const Probability& p1, const Probability& p2,
                                         const Probability& p3, const Probability& q) {
  if (n < 1) throw ModelError("range: N = " + std::to_string(n) + " must be at least 1");
  detail::require_open_unit("p1", p1);
  detail::require_open_unit("p2", p2);
  detail::require_open_unit("p3", p3);
  detail::require_open_unit("q", q);
  if (p1 + p2 + p3 != 1)
    throw ModelError("probability-sum: p1 + p2 + p3 = " + to_string(Probability(p1 + p2 + p3)) + ", expected 1");
  const std::string N = std::to_string(n);
  using detail::paren;
  return "module double_chain\n"
         "c : [0.." + N + "] init 0;   f : [0..1] init 0;   g : [0..1] init 0;\n"
         "[] c<" + N + " & g=0 -> " + paren(p1) + ":(c'=c+1) + " + paren(p2) + ":(g'=1) + " + paren(p3) +
         " : (f' =1); \n"
         "[] c<" + N + " & g=1 -> " + paren(q) + ":(c'=c+1) + (1-" + paren(q) + "): (f'=1);\n"
         "endmodule\n"
         "label bad = f'=1\n";
}

// family is "chain" (N, p) or "double_chain" (N, p1, p2, p3, q).
inline std::string generate_model(const std::string& family, const std::map<std::string, std::string>& params) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = params.find(key);
    if (it == params.end()) throw ModelError("missing parameter " + key + " for " + family);
    return it->second;
  };
  auto get_n = [&]() -> std::int64_t {
    Probability v = parse_rational(get("N"));
    if (v.get_den() != 1 || !v.get_num().fits_slong_p()) throw ModelError("N must be an integer");
    return v.get_num().get_si();
  };
  if (family == "chain") return generate_chain(get_n(), parse_rational(get("p")));
  if (family == "double_chain")
    return generate_double_chain(get_n(), parse_rational(get("p1")), parse_rational(get("p2")),
                                 parse_rational(get("p3")), parse_rational(get("q")));
  throw ModelError("unknown model family '" + family + "'");
}

}  // namespace pric3
