#include <gtest/gtest.h>

#include <random>

#include "pric3/parser.hpp"
#include "pric3/state_space.hpp"
#include "support.hpp"

using namespace pric3;
using testing_support::q;
using testing_support::read_file;

namespace {

const char* kFig4 = R"(
module ex
c : [0..20] init 0; f : [0..1] init 0;
[] c<20 -> 0.1:(f'=1) + 0.9:(c'=c+1); // cmd 1
[] c<10 -> 0.2:(f'=1) + 0.8:(c'=c+2); // cmd 2
endmodule
label bad = f=1
)";

bool has_category(const std::vector<Diagnostic>& ds, DiagnosticCategory c) {
  for (const auto& d : ds)
    if (d.category == c) return true;
  return false;
}

std::vector<std::vector<std::int64_t>> valuations(const Mdp& m) {
  std::vector<std::vector<std::int64_t>> out;
  for (StateId s = 0; s < m.num_states(); ++s) out.emplace_back(m.valuation(s).begin(), m.valuation(s).end());
  return out;
}

}  // namespace

TEST(Parser, GuardedCommandSnippet) {
  auto m = parse_program(kFig4);
  ASSERT_EQ(m.variables.size(), 2u);
  EXPECT_EQ(m.variables[0].name, "c");
  EXPECT_EQ(m.variables[0].lower, 0);
  EXPECT_EQ(m.variables[0].upper, 20);
  EXPECT_EQ(m.variables[0].init, 0);
  EXPECT_EQ(m.variables[1].name, "f");
  EXPECT_EQ(m.variables[1].upper, 1);
  ASSERT_EQ(m.commands.size(), 2u);
  EXPECT_EQ(m.commands[0].branches[0].probability, q("1/10"));
  EXPECT_EQ(m.commands[0].branches[1].probability, q("9/10"));
  EXPECT_EQ(m.commands[1].branches[0].probability, q("1/5"));
  EXPECT_EQ(m.commands[1].branches[1].probability, q("4/5"));
  EXPECT_TRUE(validate_program(m).empty());
}

TEST(Parser, ProbabilitySumReported) {
  const char* src = "module m x : [0..1] init 0; [] x=0 -> 0.5:(x'=1) + 0.4:(x'=0); endmodule label bad = x=1";
  try {
    parse_program(src);
    FAIL() << "expected a model error";
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("probability-sum"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("9/10"), std::string::npos);
  }
  auto diags = validate_program(parse_program_unchecked(src));
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].category, DiagnosticCategory::ProbabilitySum);
  EXPECT_EQ(diags[0].loc.line, 1);
}

TEST(Parser, ParametricChain) {
  auto m = parse_program(read_file(testing_support::models_dir() + "/chain.pm"), {{"N", 3}, {"p", q("1/2")}});
  EXPECT_EQ(m.variables.size(), 2u);
  EXPECT_EQ(m.variables[0].upper, 3);
  ASSERT_EQ(m.commands.size(), 1u);
  EXPECT_EQ(m.commands[0].branches[0].probability, q("1/2"));
  EXPECT_EQ(m.commands[0].branches[1].probability, q("1/2"));
  ASSERT_TRUE(m.bad_label);
  EXPECT_EQ(print_expr(*m.bad_label), "(f = 1)");
}

TEST(Parser, MissingConstantIsAnError) {
  EXPECT_THROW(parse_program(read_file(testing_support::models_dir() + "/chain.pm")), ModelError);
}

TEST(Parser, RejectsSecondModule) {
  const char* src = "module a x : [0..1]; endmodule module b y : [0..1]; endmodule label bad = x=1";
  EXPECT_THROW(parse_program(src), ModelError);
}

TEST(Parser, SyntaxErrorCarriesPosition) {
  try {
    parse_program("module m\n  x : [0..1] init 0;\n  [] x=0 -> 1:(x'=1) +;\nendmodule\nlabel bad = x=1");
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_GT(e.column(), 1);
  }
}

TEST(Parser, DecimalsAreExact) {
  EXPECT_EQ(parse_rational("0.1"), q("1/10"));
  EXPECT_EQ(parse_rational("1e-3"), q("1/1000"));
  EXPECT_EQ(parse_rational("2.5E+1"), Probability(25));
  EXPECT_EQ(parse_rational("10/4"), q("5/2"));
  EXPECT_THROW(parse_rational("1/0"), ModelError);
  EXPECT_THROW(parse_rational("abc"), ModelError);
}

TEST(Validate, CleanSnippet) { EXPECT_TRUE(validate_program(parse_program_unchecked(kFig4)).empty()); }

TEST(Validate, InitialValueOutOfRange) {
  auto diags = validate_program(parse_program_unchecked(
      "module m c : [0..20] init 21; [] c<20 -> (c'=c+1); endmodule label bad = c=20"));
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].category, DiagnosticCategory::Range);
  EXPECT_EQ(diags[0].loc.line, 1);
}

TEST(Validate, UndeclaredVariableInUpdate) {
  auto diags = validate_program(parse_program_unchecked(
      "module m c : [0..2] init 0;\n[] c<2 -> 1/2:(c'=c+1) + 1/2:(g'=1); endmodule label bad = c=2"));
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].category, DiagnosticCategory::UndeclaredVariable);
  EXPECT_EQ(diags[0].loc.line, 2);
}

TEST(Validate, MissingLabel) {
  auto diags = validate_program(parse_program_unchecked("module m c : [0..2] init 0; endmodule"));
  EXPECT_TRUE(has_category(diags, DiagnosticCategory::MissingLabel));
}

TEST(Printer, RoundTripOnBundledModels) {
  for (const char* name : {"running_example.pm", "running_example_mc.pm", "fig4.pm", "brp.pm", "zeroconf.pm"}) {
    auto text = read_file(testing_support::models_dir() + "/" + name);
    auto once = parse_program(text);
    auto twice = parse_program(print_program(once));
    EXPECT_TRUE(structurally_equal(once, twice)) << name << "\n" << print_program(once);
  }
  ConstantMap consts{{"N", 4}, {"p1", q("1/2")}, {"p2", q("1/4")}, {"p3", q("1/4")}, {"q", q("2/3")}};
  auto dc = parse_program(read_file(testing_support::models_dir() + "/double_chain.pm"), consts);
  EXPECT_TRUE(structurally_equal(dc, parse_program(print_program(dc))));
}

TEST(Printer, RoundTripOnRandomExpressions) {
  std::mt19937_64 rng(7);
  const char* atoms[] = {"x", "y", "3", "-2", "1/2", "0.25", "true", "N"};
  const char* arith[] = {"+", "-", "*"};
  const char* cmp[] = {"<", "<=", ">", ">=", "=", "!="};
  const char* logic[] = {"&", "|"};
  auto pick = [&](auto& arr) { return arr[rng() % std::size(arr)]; };
  std::function<std::string(int)> term = [&](int d) -> std::string {
    if (d == 0 || rng() % 3 == 0) {
      std::string a = pick(atoms);
      return a == "true" ? "x" : a;
    }
    return "(" + term(d - 1) + " " + pick(arith) + " " + term(d - 1) + ")";
  };
  std::function<std::string(int)> cond = [&](int d) -> std::string {
    if (d == 0 || rng() % 3 == 0) return term(2) + " " + pick(cmp) + " " + term(2);
    if (rng() % 4 == 0) return "!(" + cond(d - 1) + ")";
    return "(" + cond(d - 1) + " " + pick(logic) + " " + cond(d - 1) + ")";
  };
  for (int i = 0; i < 300; ++i) {
    std::string src = "const int N = 5;\nmodule m\n x : [0..4] init 0;\n y : [-3..3] init 1;\n [] " + cond(3) +
                      " -> 1/3:(x'=" + term(1) + ") + 2/3:(y'=" + term(1) + ")&(x'=1);\nendmodule\nlabel bad = " +
                      cond(2) + ";\n";
    auto once = parse_program_unchecked(src);
    auto twice = parse_program_unchecked(print_program(once));
    ASSERT_TRUE(structurally_equal(once, twice)) << src << "\n---\n" << print_program(once);
  }
}

TEST(StateSpace, ChainTwoSteps) {
  auto mdp = build_state_space(
      parse_program(read_file(testing_support::models_dir() + "/chain.pm"), {{"N", 2}, {"p", q("1/2")}}));
  ASSERT_EQ(mdp.num_states(), 5u);
  auto vals = valuations(mdp);
  std::set<std::vector<std::int64_t>> got(vals.begin(), vals.end());
  std::set<std::vector<std::int64_t>> want{{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}};
  EXPECT_EQ(got, want);
  for (auto v : std::vector<std::vector<std::int64_t>>{{2, 0}, {0, 1}, {1, 1}}) {
    auto s = *mdp.find_state(v);
    ASSERT_EQ(mdp.actions(s).size(), 1u);
    EXPECT_EQ(mdp.actions(s)[0].id, kDeadlockAction);
    auto tr = mdp.successors(s, 0);
    ASSERT_EQ(tr.size(), 1u);
    EXPECT_EQ(tr[0].target, s);
    EXPECT_EQ(tr[0].probability, 1);
  }
  EXPECT_TRUE(mdp.is_bad(*mdp.find_state({0, 1})));
  EXPECT_FALSE(mdp.is_bad(*mdp.find_state({2, 0})));
}

TEST(StateSpace, ImmediateDeadlock) {
  auto mdp = build_state_space(parse_program("module m x : [0..3] init 0; [] x>0 -> (x'=x-1); endmodule label bad = x=3"));
  ASSERT_EQ(mdp.num_states(), 1u);
  EXPECT_EQ(mdp.actions(0).size(), 1u);
  EXPECT_EQ(mdp.successors(0, 0)[0].target, 0u);
}

TEST(StateSpace, DoubleChainBadStates) {
  ConstantMap consts{{"N", 2}, {"p1", q("1/2")}, {"p2", q("1/4")}, {"p3", q("1/4")}, {"q", q("2/3")}};
  auto mdp = build_state_space(parse_program(read_file(testing_support::models_dir() + "/double_chain.pm"), consts));
  for (StateId s = 0; s < mdp.num_states(); ++s) EXPECT_EQ(mdp.is_bad(s), mdp.valuation(s)[1] == 1);
  EXPECT_TRUE(mdp.find_state({2, 0, 1}).has_value());
  EXPECT_TRUE(mdp.find_state({0, 1, 0}).has_value());
}

TEST(StateSpace, StatesRespectBoundsAndDistributionsSumToOne) {
  for (const char* name : {"fig4.pm", "brp.pm", "zeroconf.pm", "running_example.pm"}) {
    auto mdp = testing_support::load_model(name);
    for (StateId s = 0; s < mdp.num_states(); ++s) {
      auto val = mdp.valuation(s);
      for (std::size_t v = 0; v < mdp.num_vars(); ++v) {
        EXPECT_GE(val[v], mdp.variables()[v].lower);
        EXPECT_LE(val[v], mdp.variables()[v].upper);
      }
      for (const auto& a : mdp.actions(s)) {
        Probability sum(0);
        for (const auto& t : mdp.transitions(a)) sum += t.probability;
        EXPECT_EQ(sum, 1) << name << " state " << s;
      }
    }
  }
}

TEST(StateSpace, UpdateLeavingRangeIsAnError) {
  EXPECT_THROW(build_state_space(parse_program("module m x : [0..1] init 0; [] true -> (x'=x+1); endmodule label bad = x=5")),
               ModelError);
}

TEST(StateSpace, LimitIsEnforced) {
  auto model = parse_program(read_file(testing_support::models_dir() + "/chain.pm"), {{"N", 100}, {"p", q("1/2")}});
  try {
    build_state_space(model, {.max_states = 10});
    FAIL();
  } catch (const ResourceError& e) {
    EXPECT_NE(std::string(e.what()).find("10"), std::string::npos);
  }
}

TEST(StateSpace, BfsOrderOfRunningExample) {
  auto mdp = testing_support::load_model("running_example.pm");
  ASSERT_EQ(mdp.num_states(), 6u);
  for (StateId s = 0; s < 6; ++s) EXPECT_EQ(mdp.valuation(s)[0], static_cast<std::int64_t>(s));
}
