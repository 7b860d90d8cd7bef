#include <gtest/gtest.h>

#include <random>

#include "pric3/heuristic.hpp"
#include "support.hpp"

using namespace pric3;
using testing_support::q;
using testing_support::running_example;

namespace {

Oracle oracle_of(std::vector<Probability> v) {
  Oracle o;
  o.values = std::move(v);
  return o;
}

struct VectorFrame {
  const std::vector<Probability>* v;
  const Probability& value(StateId s) const { return (*v)[s]; }
};

VectorFrame perfect_frame(const Mdp&, const Oracle& o) { return {&o.values}; }

Oracle build_oracle_values(const Mdp&) {
  return oracle_of({q("2/3"), q("1/3"), q("3/4"), q("2/3"), 0, 1});
}

}  // namespace

TEST(Suggest, PerfectOracleKeepsRatios) {
  Mdp m = running_example(false);
  auto h = Heuristic::from_oracle(build_oracle(m, OracleKind::Perfect));
  auto x = h.suggest(m, 0, 0, q("5/9"));
  ASSERT_EQ(x.size(), 2u);
  EXPECT_EQ(x[0], q("11/18"));
  EXPECT_EQ(x[1], q("1/2"));
}

TEST(Suggest, BadMassAboveBudget) {
  Mdp m = running_example();
  auto h = Heuristic::from_oracle(build_oracle(m, OracleKind::Perfect));
  auto x = h.suggest(m, 3, 0, q("1/2"));
  EXPECT_EQ(x[0], 0);
  EXPECT_EQ(x[1], q("3/4"));
}

TEST(Suggest, ZeroBudgetGivesZeroToNonBad) {
  Mdp m = running_example();
  auto h = Heuristic::from_oracle(oracle_of({q("1/2"), q("1/2"), q("1/2"), q("1/2"), q("1/2"), 1}));
  auto x = h.suggest(m, 0, 0, 0);
  EXPECT_EQ(x[0], 0);
  EXPECT_EQ(x[1], 0);
}

TEST(Suggest, AllZeroOracleUsesOneHalf) {
  Mdp m = running_example();
  auto h = Heuristic::from_oracle(oracle_of(std::vector<Probability>(6, Probability(0))));
  auto x = h.suggest(m, 0, 0, q("1/4"));
  EXPECT_EQ(x[0], q("1/4"));
  EXPECT_EQ(x[1], q("1/4"));
}

TEST(Suggest, ClampsAtOneAndRescales) {
  Mdp m = running_example();
  auto h = Heuristic::from_oracle(oracle_of({0, q("9/10"), q("1/10"), 0, 0, 1}));
  auto x = h.suggest(m, 0, 0, q("3/4"));
  EXPECT_EQ(x[0], 1);
  EXPECT_EQ(x[1], q("1/2"));
  // Budget larger than anything attainable: everything pinned at 1.
  auto y = h.suggest(m, 0, 0, 1);
  EXPECT_EQ(y[0], 1);
  EXPECT_EQ(y[1], 1);
}

TEST(Suggest, OracleValuesAreRoundedToBoundedDenominators) {
  Mdp m = running_example();
  Oracle o = oracle_of(std::vector<Probability>(6, Probability(1, 3)));
  o.values[1] = Probability(1, 3 * 1'000'003);
  auto h = Heuristic::from_oracle(o);
  EXPECT_LE(h.weight(1).get_den(), kOracleDenominator);
}

TEST(RoundDownBits, KeepsShortValuesAndRoundsLongOnesDown) {
  EXPECT_EQ(round_down_bits(q("11/18")), q("11/18"));
  EXPECT_EQ(round_down_bits(Probability(0)), 0);
  mpz_class big;
  mpz_ui_pow_ui(big.get_mpz_t(), 3, 80);
  Probability x(big - 1, big * 2);
  x.canonicalize();
  auto r = round_down_bits(x, 64);
  EXPECT_LE(r, x);
  EXPECT_LE(mpz_sizeinbase(r.get_den_mpz_t(), 2), 66u);
  EXPECT_LT(x - r, Probability(1, 1) / Probability(mpz_class(1) << 60));
}

TEST(Suggest, LongBudgetsAreRoundedAndStayAdequate) {
  Mdp m = running_example();
  auto h = Heuristic::from_oracle(build_oracle_values(m));
  mpz_class big;
  mpz_ui_pow_ui(big.get_mpz_t(), 7, 60);
  Probability delta(big / 2, big);
  delta.canonicalize();
  auto x = h.suggest(m, 0, 0, delta);
  EXPECT_TRUE(is_adequate(m, 0, 0, delta, x));
  for (const auto& v : x) EXPECT_LE(mpz_sizeinbase(v.get_num_mpz_t(), 2), 64u);
}

TEST(ZeroHeuristic, Behaviour) {
  Mdp m = running_example();
  auto h = make_h0();
  auto x = h.suggest(m, 0, 0, 0);
  EXPECT_EQ(x[0], 0);
  EXPECT_EQ(x[1], 0);
  auto y = h.suggest(m, 2, 0, 0);  // successors s4 and s5, s5 bad
  EXPECT_EQ(y[0], 0);
  EXPECT_EQ(y[1], 0);
  EXPECT_LT(y[1], 1);
}

TEST(AdaptLocal, ChangesOutputOnceAndStaysAdequate) {
  Mdp m = running_example(false);
  auto h = Heuristic::from_oracle(build_oracle(m, OracleKind::Perfect));
  auto before = h.suggest(m, 0, 0, q("5/9"));
  EXPECT_TRUE(h.adapt_local(m, 0, 0, 1));
  EXPECT_TRUE(h.adapted(0, 0));
  auto after = h.suggest(m, 0, 0, q("5/9"));
  EXPECT_NE(before, after);
  EXPECT_GT(after[0], before[0]);
  EXPECT_TRUE(is_adequate(m, 0, 0, q("5/9"), after));
  EXPECT_FALSE(h.adapt_local(m, 0, 0, 1));
  EXPECT_EQ(h.suggest(m, 0, 0, q("5/9")), after);
  EXPECT_THROW(h.adapt_local(m, 1, 0, 5), ContractViolation);
}

TEST(Adequacy, RandomInstances) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> dd(0, 12);
  int checked = 0;
  for (int c = 0; c < 120; ++c) {
    Mdp m = testing_support::random_mdp(rng);
    std::vector<Probability> ov(m.num_states());
    for (auto& v : ov) v = Probability(dd(rng), 12);
    auto h = Heuristic::from_oracle(oracle_of(ov));
    auto h0 = make_h0();
    for (StateId s = 0; s < m.num_states(); ++s) {
      if (m.is_bad(s)) continue;
      for (std::size_t a = 0; a < m.actions(s).size(); ++a) {
        Probability delta(dd(rng), 12);
        delta.canonicalize();
        ASSERT_TRUE(is_adequate(m, s, a, delta, h.suggest(m, s, a, delta)));
        ASSERT_TRUE(is_adequate(m, s, a, delta, h0.suggest(m, s, a, delta)));
        auto succ = m.successors(s, a);
        if (h.adapt_local(m, s, a, succ[succ.size() - 1].target)) {
          ASSERT_TRUE(is_adequate(m, s, a, delta, h.suggest(m, s, a, delta)));
        }
        ++checked;
      }
    }
  }
  EXPECT_GE(checked, 500);
}

TEST(Adequacy, PerfectOracleAtExactValueHasNoClamping) {
  std::mt19937_64 rng(22);
  for (int c = 0; c < 100; ++c) {
    Mdp m = testing_support::random_mdp(rng);
    auto perfect = build_oracle(m, OracleKind::Perfect);
    auto h = Heuristic::from_oracle(perfect);
    for (StateId s = 0; s < m.num_states(); ++s) {
      if (m.is_bad(s)) continue;
      const auto& v = perfect.values[s];
      if (v == 0 || v.get_den() > kOracleDenominator) continue;
      for (std::size_t a = 0; a < m.actions(s).size(); ++a) {
        if (bellman_action(m, perfect_frame(m, perfect), s, a) != v) continue;
        auto x = h.suggest(m, s, a, v);
        auto succ = m.successors(s, a);
        Probability acc(0);
        for (std::size_t j = 0; j < succ.size(); ++j) acc += succ[j].probability * x[j];
        EXPECT_EQ(acc, v);
      }
    }
  }
}
