#include <gtest/gtest.h>

#include <random>

#include "smg/game.hpp"
#include "smg/oracle.hpp"
#include "support/random_games.hpp"

using namespace smg;

namespace {

StochasticGame one_state_loop() {
    auto g = smg::testing::empty_game(1, 1, 1);
    g.states[0].choices.push_back({0, {{0, 1.0}}});
    return g;
}

}  // namespace

TEST(Validate, SelfLoopIsClean) { EXPECT_TRUE(validate(one_state_loop()).empty()); }

TEST(Validate, ProbabilitySum) {
    auto g = one_state_loop();
    g.states[0].choices[0].branches[0].probability = 0.8;
    auto d = validate(g);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].rule, "probability sum");
    EXPECT_EQ(d[0].state, 0u);
}

TEST(Validate, Deadlock) {
    auto g = one_state_loop();
    g.states.push_back(GameState{0, {1}, {}});
    auto d = validate(g);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].rule, "deadlock");
    EXPECT_EQ(d[0].state, 1u);
}

TEST(Validate, BadOwnerTargetAndInitial) {
    auto g = one_state_loop();
    g.states[0].owner = 5;
    g.states[0].choices[0].branches[0].target = 3;
    g.initial_state = 9;
    std::set<std::string> rules;
    for (const auto& d : validate(g)) rules.insert(d.rule);
    EXPECT_TRUE(rules.count("owner"));
    EXPECT_TRUE(rules.count("branch target"));
    EXPECT_TRUE(rules.count("initial state"));
}

TEST(Validate, RandomGamesSumToOne) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        auto g = smg::testing::random_game(rng);
        EXPECT_TRUE(validate(g).empty());
        for (const auto& st : g.states)
            for (const auto& c : st.choices) {
                double sum = 0.0;
                for (const auto& b : c.branches) sum += b.probability;
                EXPECT_NEAR(sum, 1.0, kProbabilityTolerance);
            }
    }
}

TEST(MarkovChain, TwoStateCycle) {
    auto g = smg::testing::empty_game(2, 2, 1);
    g.states[0].choices.push_back({0, {{1, 1.0}}});
    g.states[1].owner = 1;
    g.states[1].choices.push_back({0, {{0, 1.0}}});
    auto mc = induce_markov_chain(g, StrategyProfile{{0, 0}});
    ASSERT_EQ(mc.num_states(), 2u);
    EXPECT_EQ(mc.rows[0], (std::vector<Branch>{{1, 1.0}}));
    EXPECT_EQ(mc.rows[1], (std::vector<Branch>{{0, 1.0}}));
}

TEST(MarkovChain, CoinFlipRow) {
    auto g = smg::testing::empty_game(2, 1, 2);
    g.states[0].choices.push_back({0, {{0, 1.0}}});
    g.states[0].choices.push_back({1, {{0, 0.5}, {1, 0.5}}});
    g.states[1].choices.push_back({0, {{1, 1.0}}});
    auto mc = induce_markov_chain(g, StrategyProfile{{1, 0}});
    EXPECT_EQ(mc.rows[0], (std::vector<Branch>{{0, 0.5}, {1, 0.5}}));
}

TEST(MarkovChain, RowsMatchChosenChoices) {
    std::mt19937_64 rng(11);
    auto g = smg::testing::random_game(rng, {4, 4, 3, 3, 2});
    for (const auto& p : oracle::enumerate_profiles(g)) {
        auto mc = induce_markov_chain(g, p);
        for (StateIndex s = 0; s < g.num_states(); ++s) EXPECT_EQ(mc.rows[s], g.states[s].choices[*p.choice[s]].branches);
    }
}

TEST(MarkovChain, MissingStateThrows) {
    auto g = one_state_loop();
    EXPECT_THROW(induce_markov_chain(g, StrategyProfile{{std::nullopt}}), GameError);
}

TEST(MarkovChain, RewardsCarriedOver) {
    auto g = smg::testing::empty_game(2, 1, 2);
    g.states[0].choices.push_back({0, {{1, 1.0}}});
    g.states[0].choices.push_back({1, {{0, 1.0}}});
    g.states[1].choices.push_back({0, {{0, 1.0}}});
    g.reward_structures["r"] = RewardStructure{{1.5, 2.5}, {{3.0, 4.0}, {5.0}}};
    auto mc = induce_markov_chain(g, StrategyProfile{{1, 0}});
    const auto& r = mc.reward_structures.at("r");
    EXPECT_EQ(r.state_rewards, (std::vector<double>{1.5, 2.5}));
    EXPECT_EQ(r.action_rewards, (std::vector<std::vector<double>>{{4.0}, {5.0}}));
}

TEST(Coalition, Roles) {
    auto g = smg::testing::empty_game(2, 2, 1);
    g.states[1].owner = 1;
    Coalition c{{0}};
    EXPECT_EQ(coalition_role(g, c, 0, Direction::Maximize), Role::Maximizer);
    EXPECT_EQ(coalition_role(g, c, 1, Direction::Maximize), Role::Minimizer);
    EXPECT_EQ(coalition_role(g, c, 0, Direction::Minimize), Role::Minimizer);
    EXPECT_EQ(coalition_role(g, c, 1, Direction::Minimize), Role::Maximizer);
}

TEST(Restrict, KeepsOnlyChosenChoice) {
    std::mt19937_64 rng(5);
    auto g = smg::testing::random_game(rng, {5, 5, 3, 2, 2});
    StrategyProfile p;
    p.choice.assign(g.num_states(), std::nullopt);
    p.choice[0] = g.states[0].choices.size() - 1;
    auto r = restrict_to_profile(g, p);
    ASSERT_EQ(r.states[0].choices.size(), 1u);
    EXPECT_EQ(r.states[0].choices[0], g.states[0].choices.back());
    for (StateIndex s = 1; s < g.num_states(); ++s) EXPECT_EQ(r.states[s].choices, g.states[s].choices);
}

TEST(Dump, RoundTrip) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        auto g = smg::testing::random_game(rng);
        g.labels["goal"] = smg::testing::random_set(rng, g.num_states());
        auto back = parse_game_dump(dump_game(g));
        EXPECT_TRUE(validate(back).empty());
        EXPECT_EQ(back.states, g.states);
        EXPECT_EQ(back.players, g.players);
        EXPECT_EQ(back.action_labels, g.action_labels);
        EXPECT_EQ(back.labels, g.labels);
    }
}

TEST(Dump, ChoiceLineFormat) {
    auto text = dump_game(one_state_loop());
    EXPECT_NE(text.find("\n0 0 0 a0 0:1\n"), std::string::npos) << text;
}
