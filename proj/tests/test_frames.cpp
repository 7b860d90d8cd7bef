#include <gtest/gtest.h>

#include <random>

#include "pric3/frames.hpp"
#include "pric3/solver.hpp"
#include "support.hpp"

using namespace pric3;
using testing_support::q;
using testing_support::running_example;

namespace {

FrameList frames_from_rows(const Mdp& mdp, const std::vector<std::vector<const char*>>& rows) {
  FrameList fl;
  fl.frames.push_back(Frame::initial(mdp));
  for (const auto& row : rows) {
    Frame f = Frame::fresh(mdp);
    for (StateId s = 0; s < row.size(); ++s) f.set_point(s, q(row[s]));
    fl.frames.push_back(std::move(f));
  }
  return fl;
}

}  // namespace

TEST(Frame, DefaultsAndInitialFrame) {
  Mdp m = running_example();
  Frame f = Frame::fresh(m);
  Frame f0 = Frame::initial(m);
  for (StateId s = 0; s < m.num_states(); ++s) {
    EXPECT_EQ(f.value(s), 1);
    EXPECT_EQ(f0.value(s), m.is_bad(s) ? 1 : 0);
  }
  EXPECT_THROW(f0.set_point(0, q("1/2")), ContractViolation);
  EXPECT_THROW(f.set_point(0, q("3/2")), ContractViolation);
}

TEST(Frame, MinimumOfPointAndGroupBound) {
  Mdp m = running_example();
  Frame f = Frame::fresh(m);
  f.set_point(0, q("5/9"));
  f.add_group(make_group(m, 0, 0, GroupShape::Constant, {0}, {q("1/2")}));
  EXPECT_EQ(frame_value(f, 0), q("1/2"));
}

TEST(Bellman, RunningExampleValues) {
  Mdp m = running_example();
  Frame f0 = Frame::initial(m);
  EXPECT_EQ(bellman_apply(m, f0, 3), q("2/3"));
  EXPECT_EQ(bellman_apply(m, Frame::fresh(m), 0), 1);
  EXPECT_EQ(bellman_apply(m, f0, 5), 1);
  std::vector<ActionId> only_b{1};
  EXPECT_EQ(bellman_apply(m, std::span<const ActionId>(only_b), f0, 2), 0);
  std::vector<ActionId> none;
  EXPECT_THROW(bellman_apply(m, std::span<const ActionId>(none), f0, 2), ContractViolation);
}

TEST(FrameSeq, WorkedUpdatesGiveExpectedFirstFrame) {
  Mdp m = running_example(false);
  FrameSeq fs(m);
  fs.push_frame();
  update_min(fs, 1, 1, q("11/18"));
  update_min(fs, 1, 2, q("1/2"));
  update_min(fs, 2, 0, q("5/9"));
  std::vector<Probability> want{q("5/9"), q("11/18"), q("1/2"), 1, 1, 1};
  for (StateId s = 0; s < 6; ++s) EXPECT_EQ(fs.value(1, s), want[s]) << s;
  EXPECT_EQ(fs.value(2, 0), q("5/9"));
  EXPECT_EQ(fs.value(2, 1), 1);
}

TEST(FrameSeq, LargerValueLeavesFramesUnchanged) {
  Mdp m = running_example();
  FrameSeq fs(m);
  fs.update_min(1, 0, q("1/3"));
  fs.update_min(1, 0, q("1/2"));
  EXPECT_EQ(fs.value(1, 0), q("1/3"));
  EXPECT_THROW(fs.update_min(0, 0, q("1/2")), ContractViolation);
  EXPECT_THROW(fs.update_min(2, 0, q("1/2")), ContractViolation);
}

TEST(FrameSeq, StaircaseKeepsChainOrder) {
  Mdp m = running_example();
  FrameSeq fs(m);
  fs.push_frame();
  fs.push_frame();
  fs.update_min(1, 0, q("1/2"));
  fs.update_min(3, 0, q("3/4"));
  fs.update_min(2, 0, q("2/3"));
  fs.update_min(3, 0, q("1/4"));
  for (std::size_t i = 1; i <= 3; ++i) EXPECT_EQ(fs.value(i, 0), q("1/4"));
  EXPECT_TRUE(fs.states_at(3).count(0));
  EXPECT_FALSE(fs.states_at(1).count(0));
}

TEST(FrameSeq, FramesEqualComparesExtensionally) {
  Mdp m = running_example();
  FrameSeq fs(m);
  fs.push_frame();
  EXPECT_FALSE(fs.frames_equal(0));
  EXPECT_TRUE(fs.frames_equal(1));
  fs.update_min(1, 3, q("2/3"));
  EXPECT_FALSE(fs.frames_equal(1));
  fs.update_min(2, 3, q("2/3"));
  EXPECT_TRUE(fs.frames_equal(1));
  EXPECT_THROW(fs.frames_equal(2), ContractViolation);
}

TEST(FrameSeq, GroupDominance) {
  Mdp m = testing_support::load_model("chain.pm", {{"N", Probability(5)}, {"p", q("1/2")}});
  FrameSeq fs(m);
  auto s = m.initial();
  auto g_hi = make_group(m, s, 0, GroupShape::Constant, {0}, {q("3/4")});
  auto g_lo = make_group(m, s, 0, GroupShape::Constant, {0}, {q("1/2")});
  EXPECT_TRUE(fs.add_group(1, g_hi));
  EXPECT_TRUE(fs.add_group(1, g_lo));
  EXPECT_EQ(fs.num_groups(), 1u);
  EXPECT_FALSE(fs.add_group(1, g_hi));
  EXPECT_EQ(fs.value(1, s), q("1/2"));
}

TEST(MemoFrame, MatchesTheWrappedFrame) {
  Mdp m = running_example();
  FrameSeq fs(m);
  fs.update_min(1, 2, q("1/2"));
  const auto view = fs.view(1);
  const MemoFrame<FrameSeq::View> memo{&view};
  for (int pass = 0; pass < 2; ++pass)
    for (StateId s = 0; s < 6; ++s) EXPECT_EQ(memo.value(s), fs.value(1, s));
  EXPECT_EQ(memo.memo.size(), 6u);
}

TEST(CheckInvariants, FinalRowOfFirstRunPasses) {
  Mdp m = running_example(false);
  auto fl = frames_from_rows(m, {{"5/9", "11/18", "1/2", "2/3", "0", "1"},
                                 {"5/9", "11/18", "1/2", "2/3", "0", "1"},
                                 {"5/9", "11/18", "1/2", "2/3", "0", "1"},
                                 {"5/9", "11/18", "1/2", "2/3", "0", "1"},
                                 {"5/9", "1", "1", "1", "1", "1"}});
  auto r = check_pric3_inv(fl, m, q("5/9"));
  EXPECT_TRUE(r.initiality.ok);
  EXPECT_TRUE(r.chain.ok);
  EXPECT_TRUE(r.safety.ok);
  EXPECT_TRUE(r.inductivity.ok);
}

TEST(CheckInvariants, ReportsWitnesses) {
  Mdp m = running_example(false);
  auto fl = frames_from_rows(m, {{"1", "1", "1", "1", "1", "1"}});
  auto r = check_pric3_inv(fl, m, q("5/9"));
  EXPECT_FALSE(r.safety.ok);
  EXPECT_EQ(r.safety.witness, m.initial());

  Frame bogus = Frame::fresh(m);  // claims F_0[s0] = 1
  FrameList bad{{bogus, Frame::fresh(m)}};
  auto r2 = check_pric3_inv(bad, m, Probability(1));
  EXPECT_FALSE(r2.initiality.ok);
  EXPECT_EQ(r2.initiality.witness, 0u);
}

TEST(BoundedReach, RunningExample) {
  Mdp m = running_example();
  EXPECT_EQ(bounded_reach(m, 5, 0), 1);
  EXPECT_EQ(bounded_reach(m, 3, 1), q("2/3"));
  Probability prev(0);
  for (std::size_t n = 0; n < 60; ++n) {
    auto v = bounded_reach(m, 0, n);
    EXPECT_GE(v, prev);
    EXPECT_LE(v, q("2/3"));
    prev = v;
  }
  EXPECT_GT(to_double(prev), 0.66);
}

TEST(BoundedReach, ConvergesOnAcyclicModels) {
  Mdp m = testing_support::load_model("fig4.pm");
  auto exact = solve_exact_max_reach(m);
  auto v = bounded_reach_all(m, m.num_states());
  for (StateId s = 0; s < m.num_states(); ++s) EXPECT_EQ(v[s], exact.values[s]);
}

TEST(Properties, BellmanIsMonotone) {
  std::mt19937_64 rng(11);
  for (int c = 0; c < 200; ++c) {
    Mdp m = testing_support::random_mdp(rng);
    Frame lo = Frame::fresh(m), hi = Frame::fresh(m);
    std::uniform_int_distribution<int> d(0, 8);
    for (StateId s = 0; s < m.num_states(); ++s) {
      int a = d(rng), b = d(rng);
      lo.set_point(s, Probability(std::min(a, b), 8));
      hi.set_point(s, Probability(std::max(a, b), 8));
    }
    for (StateId s = 0; s < m.num_states(); ++s) EXPECT_LE(bellman_apply(m, lo, s), bellman_apply(m, hi, s));
  }
}

// Frames built as Phi^i(0) snapped up to a coarse grid satisfy the invariants;
// bounded reachability must then stay below every frame.
TEST(Properties, InvariantFramesBoundBoundedReach) {
  std::mt19937_64 rng(12);
  int checked = 0;
  for (int c = 0; c < 200; ++c) {
    Mdp m = testing_support::random_mdp(rng);
    const std::size_t k = 4;
    FrameSeq fs(m);
    for (std::size_t i = 1; i < k; ++i) fs.push_frame();
    for (std::size_t i = k; i >= 1; --i) {
      auto exact = solve_exact_max_reach(m).values;
      for (StateId s = 0; s < m.num_states(); ++s)
        if (!m.is_bad(s)) fs.update_min(i, s, exact[s]);
    }
    Probability lambda = fs.value(k, m.initial());
    auto r = check_pric3_inv(fs, m, lambda);
    ASSERT_TRUE(r.all());
    for (std::size_t i = 0; i <= k; ++i) {
      auto br = bounded_reach_all(m, i);
      for (StateId s = 0; s < m.num_states(); ++s) EXPECT_LE(br[s], fs.value(i, s));
    }
    ++checked;
  }
  EXPECT_EQ(checked, 200);
}

TEST(Properties, RandomValidUpdatesPreserveInvariants) {
  std::mt19937_64 rng(13);
  for (int c = 0; c < 200; ++c) {
    Mdp m = testing_support::random_mdp(rng);
    FrameSeq fs(m);
    fs.push_frame();
    fs.push_frame();
    std::uniform_int_distribution<StateId> sd(0, m.num_states() - 1);
    std::uniform_int_distribution<std::size_t> id(1, 3);
    for (int u = 0; u < 30; ++u) {
      StateId s = sd(rng);
      std::size_t i = id(rng);
      Probability delta = bellman_apply(m, fs.view(i - 1), s);
      fs.update_min(i, s, delta);
    }
    auto r = check_pric3_inv(fs, m, Probability(1));
    EXPECT_TRUE(r.initiality.ok);
    EXPECT_TRUE(r.chain.ok);
    EXPECT_TRUE(r.inductivity.ok);
  }
}
