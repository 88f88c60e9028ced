#include <gtest/gtest.h>

#include <random>

#include "smg/oracle.hpp"
#include "smg/shield.hpp"
#include "smg/solver.hpp"
#include "support/listing_fixture.hpp"
#include "support/random_games.hpp"

using namespace smg;

namespace {

const Coalition kShield{{0}};

// One coalition state with the given actions and hand-set Q values.
struct Handmade {
    StochasticGame game;
    SolveResult q;
};

Handmade handmade(std::vector<std::pair<ActionId, double>> actions) {
    Handmade h;
    h.game.players = {"shield"};
    h.game.variables = {"x"};
    h.game.action_labels = {"e", "s", "w", "n"};
    GameState st;
    st.valuation = {0};
    for (auto [a, v] : actions) {
        st.choices.push_back({a, {{0, 1.0}}});
        h.q.q_values.push_back({});
        h.q.q_values[0].push_back(v);
    }
    h.q.q_values.resize(1);
    h.game.states.push_back(st);
    return h;
}

std::vector<ActionId> allowed_ids(const PreShield& s) {
    std::vector<ActionId> out;
    for (const auto& a : s.rows.at(0).allowed) out.push_back(a.action);
    return out;
}

}  // namespace

TEST(PreShield, AbsoluteThreshold) {
    auto h = handmade({{0, 1.0}, {1, 1.0}, {2, 0.3}});
    auto s = synthesize_pre_safety(h.game, kShield, h.q, Threshold::absolute(0.8));
    EXPECT_EQ(allowed_ids(s), (std::vector<ActionId>{0, 1}));
    EXPECT_EQ(s.rows[0].blocked, 1u);
}

TEST(PreShield, RelativeOneKeepsArgmax) {
    auto h = handmade({{0, 0.4}, {1, 0.7}, {2, 0.7}, {3, 0.2}});
    EXPECT_EQ(allowed_ids(synthesize_pre_safety(h.game, kShield, h.q, Threshold::relative(1.0))),
              (std::vector<ActionId>{1, 2}));
}

TEST(PreShield, GammaZeroAllowsAll) {
    auto h = handmade({{0, 0.0}, {1, 0.7}, {2, 0.1}});
    EXPECT_EQ(allowed_ids(synthesize_pre_safety(h.game, kShield, h.q, Threshold::absolute(0.0))).size(), 3u);
}

TEST(PreShield, FallbackKeepsAllArgmaxActions) {
    auto h = handmade({{0, 0.5}, {1, 0.7}, {2, 0.7}});
    EXPECT_EQ(allowed_ids(synthesize_pre_safety(h.game, kShield, h.q, Threshold::absolute(0.95))),
              (std::vector<ActionId>{1, 2}));
}

TEST(PreShield, RelativeAtZeroAllowsAll) {
    auto h = handmade({{0, 0.0}, {1, 0.0}});
    EXPECT_EQ(allowed_ids(synthesize_pre_safety(h.game, kShield, h.q, Threshold::relative(0.9))).size(), 2u);
}

TEST(PreShield, EntriesSortedByActionId) {
    auto h = handmade({{3, 1.0}, {0, 1.0}, {2, 1.0}});
    EXPECT_EQ(allowed_ids(synthesize_pre_safety(h.game, kShield, h.q, Threshold::absolute(0.5))),
              (std::vector<ActionId>{0, 2, 3}));
}

TEST(PreShield, ThresholdOutOfRange) {
    auto h = handmade({{0, 1.0}});
    EXPECT_THROW(synthesize_pre_safety(h.game, kShield, h.q, Threshold::absolute(1.2)), ShieldError);
    EXPECT_THROW(synthesize_post_safety(h.game, kShield, h.q, Threshold::relative(-0.1)), ShieldError);
}

TEST(PreShield, RelativeSetInvariantUnderScaling) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        auto h = handmade({{0, u(rng)}, {1, u(rng)}, {2, u(rng)}, {3, u(rng)}});
        auto base = allowed_ids(synthesize_pre_safety(h.game, kShield, h.q, Threshold::relative(0.8)));
        // powers of two keep the products exact
        for (double c : {1.0, 0.5, 0.25, 0.125}) {
            auto scaled = h;
            for (auto& v : scaled.q.q_values[0]) v *= c;
            EXPECT_EQ(allowed_ids(synthesize_pre_safety(scaled.game, kShield, scaled.q, Threshold::relative(0.8))),
                      base);
        }
    }
}

TEST(PostShield, CorrectsBelowThreshold) {
    auto h = handmade({{0, 0.9}, {2, 1.0}});
    auto s = synthesize_post_safety(h.game, kShield, h.q, Threshold::relative(0.95));
    ASSERT_EQ(s.rows[0].forwards.size(), 2u);
    EXPECT_EQ(s.rows[0].forwards[0].forwarded, 2u);
    EXPECT_EQ(s.rows[0].forwards[1].forwarded, 2u);
    EXPECT_EQ(s.corrections(), 1u);
}

TEST(PostShield, EqualValuesAreIdentity) {
    auto h = handmade({{0, 0.6}, {1, 0.6}, {3, 0.6}});
    auto s = synthesize_post_safety(h.game, kShield, h.q, Threshold::relative(0.99));
    for (const auto& f : s.rows[0].forwards) EXPECT_EQ(f.forwarded, f.action);
}

TEST(PostShield, FallbackIsLowestArgmaxId) {
    auto h = handmade({{3, 1.0}, {1, 1.0}, {0, 0.1}});
    auto s = synthesize_post_safety(h.game, kShield, h.q, Threshold::absolute(0.5));
    EXPECT_EQ(s.rows[0].forwards[0].action, 0u);
    EXPECT_EQ(s.rows[0].forwards[0].forwarded, 1u);
}

TEST(PostShield, NeverWorse) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        auto g = smg::testing::random_game(rng);
        auto safe = smg::testing::random_set(rng, g.num_states(), 0.7);
        auto q = solve_bounded_safety(g, kShield, safe, 1 + i % 5);
        for (auto t : {Threshold::absolute(u(rng)), Threshold::relative(u(rng))}) {
            auto s = synthesize_post_safety(g, kShield, q, t);
            for (const auto& row : s.rows) {
                EXPECT_EQ(row.forwards.size(), g.states[row.state].choices.size());
                for (const auto& f : row.forwards)
                    EXPECT_GE(q.q_values[row.state][f.forwarded_choice], q.q_values[row.state][f.choice]);
            }
        }
    }
}

TEST(OptimalShield, ForwardsToStrategy) {
    auto h = handmade({{0, 0}, {1, 0}, {2, 0}});
    h.q.strategy.choice = {2};
    auto s = synthesize_optimal(h.game, kShield, h.q);
    for (const auto& f : s.rows[0].forwards) EXPECT_EQ(f.forwarded, 2u);
    EXPECT_TRUE(s.optimal());
}

TEST(OptimalShield, SingleActionIdentity) {
    auto h = handmade({{1, 0}});
    h.q.strategy.choice = {0};
    auto s = synthesize_optimal(h.game, kShield, h.q);
    EXPECT_EQ(s.rows[0].forwards[0].forwarded, 1u);
}

TEST(OptimalShield, CorridorWaitForwardsToMove) {
    // cells 0..3; moving costs 1, waiting 2, moving on from cell 3 delivers (-10) and returns to 0
    auto g = smg::testing::empty_game(4, 1, 2);
    g.action_labels = {"move", "wait"};
    RewardStructure cost;
    for (StateIndex s = 0; s < 4; ++s) {
        g.states[s].choices = {{0, {{(s + 1) % 4, 1.0}}}, {1, {{s, 1.0}}}};
        cost.action_rewards.push_back({s == 3 ? 1.0 - 10.0 : 1.0, 2.0});
    }
    auto lra = solve_mean_payoff(g, kShield, cost, Direction::Minimize);
    auto exact = oracle::value(g, kShield, oracle::Objective::mean_payoff(cost), Direction::Minimize);
    EXPECT_NEAR(exact[0], -1.5, 1e-12);
    EXPECT_NEAR(lra.values[0], exact[0], 1e-3);
    auto s = synthesize_optimal(g, kShield, lra);
    for (const auto& row : s.rows)
        for (const auto& f : row.forwards) EXPECT_EQ(g.action_labels[f.forwarded], "move");
}

TEST(Render, GoldenListings) {
    auto g = smg::testing::listing_game();
    std::vector<bool> safe(g.num_states());
    for (StateIndex s = 0; s < g.num_states(); ++s) safe[s] = !g.labels["crash"][s];
    auto q = solve_bounded_safety(g, kShield, safe, 14);
    EXPECT_EQ(render_shield(synthesize_pre_safety(g, kShield, q, Threshold::absolute(0.8), 14), g),
              smg::testing::kPreListing);
    EXPECT_EQ(render_shield(synthesize_post_safety(g, kShield, q, Threshold::relative(0.95), 14), g),
              smg::testing::kPostListing);
}

TEST(Render, EmptyShieldIsHeaderOnly) {
    PreShield pre{Threshold::absolute(0.8), 3, {}};
    EXPECT_EQ(render_shield(pre, StochasticGame{}),
              "Pre-Safety-Shield with absolute comparison (gamma = 0.8):\n"
              " state_id [label]:  'allowed actions' [<value>: (<action_id {label})>]:\n\n");
    PostShield post{Threshold::relative(1.0), 3, {}};
    EXPECT_EQ(render_shield(post, StochasticGame{}).substr(0, 60),
              "Post-Safety-Shield with relative comparison (lambda = 1):\n s");
}

TEST(Render, Deterministic) {
    auto g = smg::testing::listing_game();
    std::vector<bool> safe{true, true, true, true, true, true, true, true, true, false};
    auto a = solve_bounded_safety(g, kShield, safe, 5);
    auto b = solve_bounded_safety(g, kShield, safe, 5);
    EXPECT_EQ(render_shield(synthesize_pre_safety(g, kShield, a, Threshold::absolute(0.5)), g),
              render_shield(synthesize_pre_safety(g, kShield, b, Threshold::absolute(0.5)), g));
}

TEST(Render, ValueFormatting) {
    EXPECT_EQ(format_shield_value(1.0), "1");
    EXPECT_EQ(format_shield_value(0.2 + 0.7 + 0.1), "1.0");
    EXPECT_EQ(format_shield_value(0.9), "0.9");
    EXPECT_EQ(format_shield_value(0.0), "0");
    EXPECT_EQ(format_shield_value(0.25), "0.25");
    EXPECT_EQ(format_shield_value(0.1 * 3), "0.3");
}

TEST(Export, TabSeparated) {
    auto g = smg::testing::listing_game();
    std::vector<bool> safe(10, true);
    safe[9] = false;
    auto q = solve_bounded_safety(g, kShield, safe, 14);
    auto pre = export_shield_tsv(synthesize_pre_safety(g, kShield, q, Threshold::absolute(0.8), 14), g);
    EXPECT_EQ(pre.substr(0, pre.find('\n')), "# pre-safety\tgamma=0.8\thorizon=14");
    EXPECT_NE(pre.find("\n3\tmove=0 & x1=1 & y1=0 & x2=3 & y2=4\t0\te\t0.9\t2\tw\t1\n"), std::string::npos) << pre;
    auto post = export_shield_tsv(synthesize_post_safety(g, kShield, q, Threshold::relative(0.95), 14), g);
    EXPECT_NE(post.find("\n3\tmove=0 & x1=1 & y1=0 & x2=3 & y2=4\t0\te\t2\tw\t2\tw\t2\tw\n"), std::string::npos)
        << post;
}
