#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "smg/oracle.hpp"
#include "smg/solver.hpp"
#include "support/random_games.hpp"

using namespace smg;

namespace {

MarkovChain chain(std::vector<std::vector<Branch>> rows) { return MarkovChain{std::move(rows), {}}; }

StochasticGame counted(std::vector<std::size_t> choices) {
    auto g = smg::testing::empty_game(choices.size(), 1, 3);
    for (StateIndex s = 0; s < choices.size(); ++s)
        for (std::size_t c = 0; c < choices[s]; ++c) g.states[s].choices.push_back({c, {{s, 1.0}}});
    return g;
}

}  // namespace

TEST(EnumerateProfiles, Counts) {
    EXPECT_EQ(oracle::enumerate_profiles(counted({2, 2})).size(), 4u);
    EXPECT_EQ(oracle::enumerate_profiles(counted({1, 1, 1})).size(), 1u);
    EXPECT_EQ(oracle::enumerate_profiles(counted({2, 3, 1})).size(), 6u);
}

TEST(EnumerateProfiles, EachProfileOnce) {
    auto all = oracle::enumerate_profiles(counted({2, 3, 1}));
    std::set<std::vector<std::optional<std::size_t>>> distinct;
    for (const auto& p : all) distinct.insert(p.choice);
    EXPECT_EQ(distinct.size(), all.size());
}

TEST(EnumerateProfiles, Budget) {
    oracle::Budget tight;
    tight.max_profile_count = 5;
    EXPECT_THROW(oracle::enumerate_profiles(counted({2, 3, 1}), tight), oracle::BudgetExceeded);
    EXPECT_THROW(oracle::enumerate_profiles(counted(std::vector<std::size_t>(9, 1))), oracle::BudgetExceeded);
}

TEST(McReach, AbsorbingTargetAndUnreachable) {
    auto mc = chain({{{0, 1.0}}, {{1, 1.0}}});
    EXPECT_EQ(oracle::mc_reach_exact(mc, {true, false}), (std::vector<double>{1.0, 0.0}));
}

TEST(McReach, GamblersRuin) {
    // walk on 0..3, absorbing ends, up with probability p
    const double p = 0.3, q = 1 - p;
    auto mc = chain({{{0, 1.0}}, {{2, p}, {0, q}}, {{3, p}, {1, q}}, {{3, 1.0}}});
    auto v = oracle::mc_reach_exact(mc, {false, false, false, true});
    for (int i = 0; i <= 3; ++i) {
        double r = q / p;
        double expected = (1 - std::pow(r, i)) / (1 - std::pow(r, 3));
        EXPECT_NEAR(v[i], expected, 1e-12) << i;
    }
}

TEST(McUntil, BlockedBySafeSet) {
    auto mc = chain({{{1, 1.0}}, {{2, 1.0}}, {{2, 1.0}}});
    EXPECT_EQ(oracle::mc_until_exact(mc, {true, false, false}, {false, false, true}), (std::vector<double>{0, 0, 1}));
    EXPECT_EQ(oracle::mc_until_exact(mc, {true, true, false}, {false, false, true}), (std::vector<double>{1, 1, 1}));
}

TEST(McLra, TwoCycle) {
    auto mc = chain({{{1, 1.0}}, {{0, 1.0}}});
    auto g = oracle::mc_lra_exact(mc, RewardStructure{{0.0, 4.0}, {}});
    EXPECT_NEAR(g[0], 2.0, 1e-12);
    EXPECT_NEAR(g[1], 2.0, 1e-12);
}

TEST(McLra, TwoAbsorbingStates) {
    auto mc = chain({{{1, 0.5}, {2, 0.5}}, {{1, 1.0}}, {{2, 1.0}}});
    auto g = oracle::mc_lra_exact(mc, RewardStructure{{0.0, 1.0, 5.0}, {}});
    EXPECT_NEAR(g[0], 3.0, 1e-12);
    EXPECT_EQ(oracle::bottom_sccs(mc), (std::vector<std::vector<StateIndex>>{{1}, {2}}));
}

TEST(McLra, ActionRewardColumn) {
    auto mc = chain({{{0, 1.0}}});
    auto g = oracle::mc_lra_exact(mc, RewardStructure{{1.0}, {{2.5}}});
    EXPECT_NEAR(g[0], 3.5, 1e-12);
}

TEST(McLra, AgreesWithSimulation) {
    std::mt19937_64 rng(42);
    std::vector<std::vector<Branch>> rows(6);
    for (StateIndex s = 0; s < 6; ++s) {
        auto p = smg::testing::random_distribution(rng, 6);
        for (StateIndex t = 0; t < 6; ++t) rows[s].push_back({t, p[t]});
    }
    auto mc = chain(rows);
    RewardStructure r{{1, 7, 2, 0, 5, 3}, {}};
    auto exact = oracle::mc_lra_exact(mc, r);

    std::uniform_real_distribution<double> u(0.0, 1.0);
    StateIndex s = 0;
    double total = 0.0;
    const int steps = 1'000'000;
    for (int i = 0; i < steps; ++i) {
        total += r.state_rewards[s];
        double x = u(rng), acc = 0.0;
        StateIndex next = rows[s].back().target;
        for (const auto& b : rows[s])
            if ((acc += b.probability) > x) {
                next = b.target;
                break;
            }
        s = next;
    }
    EXPECT_NEAR(total / steps, exact[0], 1e-2);
}

TEST(OracleValue, NoOpponentIsBestProfile) {
    auto g = smg::testing::empty_game(3, 1, 2);
    g.states[0].choices = {{0, {{1, 0.4}, {2, 0.6}}}, {1, {{1, 0.7}, {2, 0.3}}}};
    g.states[1].choices = {{0, {{1, 1.0}}}};
    g.states[2].choices = {{0, {{2, 1.0}}}};
    auto v = oracle::value(g, Coalition{{0}}, oracle::Objective::reach({false, true, false}), Direction::Maximize);
    EXPECT_NEAR(v[0], 0.7, 1e-12);
}

TEST(OracleValue, SingleStateLra) {
    auto g = smg::testing::empty_game(1, 1, 1);
    g.states[0].choices = {{0, {{0, 1.0}}}};
    RewardStructure r{{4.25}, {}};
    auto v = oracle::value(g, Coalition{{0}}, oracle::Objective::mean_payoff(r), Direction::Maximize);
    EXPECT_DOUBLE_EQ(v[0], 4.25);
}

TEST(OracleValue, SymmetricGuessingGame) {
    // the coalition names a side, the opponent picks one of two mirrored coins
    auto g = smg::testing::empty_game(4, 2, 2);
    g.states[0].choices = {{0, {{1, 1.0}}}, {1, {{1, 1.0}}}};
    g.states[1].owner = 1;
    g.states[1].choices = {{0, {{2, 0.5}, {3, 0.5}}}, {1, {{3, 0.5}, {2, 0.5}}}};
    g.states[2].choices = {{0, {{2, 1.0}}}};
    g.states[3].choices = {{0, {{3, 1.0}}}};
    std::vector<bool> target{false, false, true, false};
    auto v = oracle::value(g, Coalition{{0}}, oracle::Objective::reach(target), Direction::Maximize);
    EXPECT_GT(v[0], 0.0);
    EXPECT_LT(v[0], 1.0);
    EXPECT_NEAR(v[0], 0.5, 1e-12);
    auto solved = solve_reachability(g, Coalition{{0}}, target, Direction::Maximize);
    EXPECT_NEAR(solved.values[0], v[0], 1e-5);
}

TEST(OracleValue, BoundedSafetyAgreesWithTree) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 20; ++i) {
        auto g = smg::testing::random_game(rng, {3, 5, 2, 2, 2});
        auto safe = smg::testing::random_set(rng, g.num_states(), 0.7);
        auto v = oracle::value(g, Coalition{{0}}, oracle::Objective::bounded_safety(safe, 3), Direction::Maximize);
        auto res = solve_bounded_safety(g, Coalition{{0}}, safe, 3);
        for (StateIndex s = 0; s < g.num_states(); ++s) EXPECT_NEAR(v[s], res.values[s], 1e-12);
    }
}

TEST(OracleValue, BudgetRefusal) {
    auto g = counted(std::vector<std::size_t>(9, 2));
    EXPECT_THROW(oracle::value(g, Coalition{{0}}, oracle::Objective::reach(std::vector<bool>(9, false)),
                               Direction::Maximize),
                 oracle::BudgetExceeded);
}
