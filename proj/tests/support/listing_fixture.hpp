#pragma once

#include <string>

#include "smg/game.hpp"

namespace smg::testing {

// Warehouse-style game with known shield listings. States 0, 3 and 4 belong to the shield; the branch order at
// state 0's `e` (0.2, 0.7, 0.1) makes its value sum to 0.9999999999999999.
inline StochasticGame listing_game() {
    StochasticGame g;
    g.players = {"shield", "adversary"};
    g.variables = {"move", "x1", "y1", "x2", "y2"};
    g.action_labels = {"e", "s", "w", "n", "step"};
    auto state = [&](PlayerId owner, std::vector<std::int64_t> val) {
        GameState st;
        st.owner = owner;
        st.valuation = std::move(val);
        g.states.push_back(std::move(st));
    };
    state(0, {0, 0, 0, 4, 4});  // 0
    state(1, {1, 0, 0, 4, 4});  // 1
    state(1, {1, 1, 0, 4, 4});  // 2
    state(0, {0, 1, 0, 3, 4});  // 3
    state(0, {0, 1, 0, 4, 4});  // 4
    state(1, {1, 1, 0, 4, 3});  // 5
    state(1, {1, 0, 1, 4, 4});  // 6
    state(1, {1, 1, 0, 3, 4});  // 7
    state(1, {1, 2, 0, 4, 4});  // 8 safe sink
    state(1, {1, 4, 4, 4, 4});  // 9 crash sink

    auto choice = [&](StateIndex s, ActionId a, std::vector<Branch> branches) {
        g.states[s].choices.push_back({a, std::move(branches)});
    };
    choice(0, 0, {{5, 0.2}, {6, 0.7}, {7, 0.1}});
    choice(0, 1, {{8, 1.0}});
    choice(1, 4, {{8, 1.0}});
    choice(2, 4, {{8, 1.0}});
    choice(3, 0, {{9, 0.1}, {8, 0.9}});
    choice(3, 2, {{8, 1.0}});
    choice(4, 1, {{8, 0.9}, {9, 0.1}});
    choice(4, 3, {{8, 1.0}});
    for (StateIndex s : {5, 6, 7}) choice(s, 4, {{8, 1.0}});
    choice(8, 4, {{8, 1.0}});
    choice(9, 4, {{9, 1.0}});

    g.labels["crash"] = std::vector<bool>(g.states.size(), false);
    g.labels["crash"][9] = true;
    return g;
}

inline const std::string kPreListing =
    "Pre-Safety-Shield with absolute comparison (gamma = 0.8):\n"
    " state_id [label]:  'allowed actions' [<value>: (<action_id {label})>]:\n"
    "\n"
    "0 [move=0 & x1=0 & y1=0 & x2=4 & y2=4]:  1.0:(0 {e}); 1:(1 {s})\n"
    "3 [move=0 & x1=1 & y1=0 & x2=3 & y2=4]:  0.9:(0 {e}); 1:(2 {w})\n"
    "4 [move=0 & x1=1 & y1=0 & x2=4 & y2=4]:  0.9:(1 {s}); 1:(3 {n})\n";

inline const std::string kPostListing =
    "Post-Safety-Shield with relative comparison (lambda = 0.95):\n"
    " state_id [label]: 'forwarded actions' [<action_id> {label}: <forwarded_action_id> {label}]:\n"
    "\n"
    "0 [move=0 & x1=0 & y1=0 & x2=4 & y2=4]:  0{e}:0{e}; 1{s}:1{s}\n"
    "3 [move=0 & x1=1 & y1=0 & x2=3 & y2=4]:  0{e}:2{w}; 2{w}:2{w}\n"
    "4 [move=0 & x1=1 & y1=0 & x2=4 & y2=4]:  1{s}:3{n}; 3{n}:3{n}\n";

}  // namespace smg::testing
