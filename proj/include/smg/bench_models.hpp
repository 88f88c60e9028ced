#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

// Generators for the case-study models. Each returns model source text that
// parse_model/build_game accept.

namespace smg::bench {

class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Virus spreading on an m x n grid network (4-neighbour adjacency). The
/// top-left node starts infected and can never be cleaned. The attacker picks
/// one (infected, uninfected neighbour) pair per turn and succeeds with
/// probability a; the defender picks one infected node and cleans it with
/// probability c.
struct VirusParams {
    int m = 2;
    int n = 2;
    double a = 0.5;
    double c = 0.0;
};

/// Two robots alternate moves on an N x N grid, starting in opposite
/// corners. A move fails (the robot stays) with probability p_failure. A
/// robot picks up fuel at the other robot's corner and brings it home; the
/// "fuel" reward counts robot 1's pickups.
struct CtfParams {
    int N = 3;
    double p_failure = 0.1;
};

/// Our robot and an adversarial robot in a warehouse of n x 3 shelves laid
/// out on a (2n+1) x 7 grid. The adversary's moves slip with probability
/// `slip`. Robot 1 fetches goods at the bottom-right corner and delivers
/// them at the top-left corner.
struct WarehouseParams {
    int n = 2;
    std::size_t horizon = 14;
    double lambda = 0.9;
    double waiting_penalty = 2.0;
    double slip = 0.1;
    double delivery_reward = 30.0;
};

std::string gen_virus(const VirusParams& params);
std::string gen_ctf(const CtfParams& params);
std::string gen_warehouse(const WarehouseParams& params);

/// Properties matching the generated models.
std::string virus_property();
std::string warehouse_safety_property(const WarehouseParams& params, bool post);

}  // namespace smg::bench
