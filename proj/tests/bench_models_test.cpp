#include <gtest/gtest.h>

#include "smg/bench_models.hpp"
#include "smg/model.hpp"
#include "smg/solver.hpp"

using namespace smg;

namespace {

StochasticGame build(const std::string& text) { return build_game(parse_model(text)); }

SolveResult check(const StochasticGame& g, const std::string& prop, const SolverParams& params = {}) {
    return evaluate(g, bind(parse_property(prop), g), params);
}

std::int64_t var(const StochasticGame& g, StateIndex s, const std::string& name) {
    auto it = std::find(g.variables.begin(), g.variables.end(), name);
    return g.states[s].valuation.at(static_cast<std::size_t>(it - g.variables.begin()));
}

}  // namespace

TEST(Generators, BuildWithoutDiagnostics) {
    for (auto [m, n] : {std::pair{2, 1}, {1, 3}, {2, 2}, {3, 2}}) {
        auto g = build(bench::gen_virus({m, n, 0.5, 0.2}));
        EXPECT_TRUE(validate(g).empty()) << m << "x" << n;
    }
    for (int N : {2, 3, 4}) EXPECT_TRUE(validate(build(bench::gen_ctf({N, 0.1}))).empty()) << N;
    EXPECT_TRUE(validate(build(bench::gen_warehouse({}))).empty());
}

TEST(Generators, RejectBadParameters) {
    EXPECT_THROW(bench::gen_virus({1, 1, 0.5, 0.0}), bench::ParamError);
    EXPECT_THROW(bench::gen_virus({2, 2, 0.0, 0.0}), bench::ParamError);
    EXPECT_THROW(bench::gen_ctf({1, 0.1}), bench::ParamError);
    EXPECT_THROW(bench::gen_ctf({3, 1.0}), bench::ParamError);
    bench::WarehouseParams w;
    w.n = 1;
    EXPECT_THROW(bench::gen_warehouse(w), bench::ParamError);
}

TEST(Virus, OriginNeverCleaned) {
    auto g = build(bench::gen_virus({3, 2, 0.5, 0.5}));
    EXPECT_FALSE(g.action_index("clean_0"));
    EXPECT_TRUE(g.action_index("clean_1"));
    for (StateIndex s = 0; s < g.num_states(); ++s) EXPECT_EQ(var(g, s, "n0"), 1);
}

TEST(Virus, NoCleaningInfectsEverything) {
    auto g = build(bench::gen_virus({2, 1, 0.5, 0.0}));
    auto r = check(g, bench::virus_property());
    EXPECT_NEAR(r.values[g.initial_state], 2.0, 1e-3);
}

TEST(Virus, CleaningLowersInfections) {
    SolverParams params;
    params.lra_gain_tolerance = 1e-6;
    double previous = 1e9;
    for (double c : {0.0, 0.3, 0.6, 0.9}) {
        auto g = build(bench::gen_virus({2, 2, 0.5, c}));
        double v = check(g, bench::virus_property(), params).values[g.initial_state];
        EXPECT_LE(v, previous + 1e-4) << c;
        previous = v;
    }
}

TEST(Ctf, BoundedArrival) {
    auto g = build(bench::gen_ctf({2, 0.0}));
    // robot 1 needs two of its own moves, which takes three alternating steps
    EXPECT_DOUBLE_EQ(check(g, "<<robot1>> Pmax=? [ F<=3 \"r1_at_target\" ]").values[g.initial_state], 1.0);
    EXPECT_DOUBLE_EQ(check(g, "<<robot1>> Pmax=? [ F<=2 \"r1_at_target\" ]").values[g.initial_state], 0.0);
}

TEST(Ctf, OneStepArrivalWithFailures) {
    auto g = build(bench::gen_ctf({2, 0.5}));
    auto r = check(g, "<<robot1>> Pmax=? [ X \"r1_at_target\" ]");
    bool found = false;
    for (StateIndex s = 0; s < g.num_states(); ++s)
        if (var(g, s, "turn") == 0 && var(g, s, "x1") == 1 && var(g, s, "y1") == 0) {
            EXPECT_DOUBLE_EQ(r.values[s], 0.5);
            found = true;
        }
    EXPECT_TRUE(found);
}

TEST(Ctf, FailuresLowerFuelRate) {
    const std::string prop = "<<robot1>> R{\"fuel\"}max=? [ S ]";
    auto reliable = build(bench::gen_ctf({3, 0.0}));
    auto flaky = build(bench::gen_ctf({3, 0.5}));
    double a = check(reliable, prop).values[reliable.initial_state];
    double b = check(flaky, prop).values[flaky.initial_state];
    EXPECT_GT(a, 0.0);
    EXPECT_GT(a, b);
}

TEST(Warehouse, DistantRobotsAreSafe) {
    bench::WarehouseParams p;
    p.horizon = 3;
    auto g = build(bench::gen_warehouse(p));
    auto r = check(g, bench::warehouse_safety_property(p, false));
    // robots start 8 cells apart, more than 2k
    for (double q : r.q_values[g.initial_state]) EXPECT_DOUBLE_EQ(q, 1.0);
}

TEST(Warehouse, StepIntoAdversaryIsUnsafe) {
    bench::WarehouseParams p;
    p.horizon = 1;
    auto g = build(bench::gen_warehouse(p));
    auto r = check(g, bench::warehouse_safety_property(p, false));
    auto east = *g.action_index("e");
    std::size_t seen = 0;
    for (StateIndex s = 0; s < g.num_states(); ++s) {
        if (var(g, s, "move") != 0 || g.has_label(s, "crash")) continue;
        if (var(g, s, "x2") != var(g, s, "x1") + 1 || var(g, s, "y2") != var(g, s, "y1")) continue;
        for (std::size_t c = 0; c < g.states[s].choices.size(); ++c)
            if (g.states[s].choices[c].action == east) {
                EXPECT_LT(r.q_values[s][c], 1.0);
                ++seen;
            }
    }
    EXPECT_GT(seen, 0u);
}

TEST(Warehouse, StateCount) {
    EXPECT_EQ(build(bench::gen_warehouse({})).num_states(), 3248u);
}
