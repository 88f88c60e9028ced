#include "smg/bench_models.hpp"

#include <algorithm>
#include <sstream>
#include <utility>
#include <vector>

#include "smg/expr.hpp"

namespace smg::bench {

namespace {

std::string real(double v) { return value_to_string(Value{v}); }

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

std::string node(int i) { return "n" + std::to_string(i); }

}  // namespace

std::string gen_virus(const VirusParams& p) {
    if (p.m < 1 || p.n < 1 || p.m * p.n < 2) throw ParamError("virus grid needs at least two nodes");
    if (!(p.a > 0.0 && p.a <= 1.0)) throw ParamError("attack probability a must lie in (0, 1]");
    if (!(p.c >= 0.0 && p.c <= 1.0)) throw ParamError("clean probability c must lie in [0, 1]");

    const int nodes = p.m * p.n;
    // node (row, col) has index row * m + col; m is the grid width
    std::vector<std::pair<int, int>> edges;
    for (int r = 0; r < p.n; ++r)
        for (int col = 0; col < p.m; ++col) {
            int i = r * p.m + col;
            if (col + 1 < p.m) {
                edges.emplace_back(i, i + 1);
                edges.emplace_back(i + 1, i);
            }
            if (r + 1 < p.n) {
                edges.emplace_back(i, i + p.m);
                edges.emplace_back(i + p.m, i);
            }
        }
    std::sort(edges.begin(), edges.end());

    auto attack = [](int from, int to) { return "attack_" + std::to_string(from) + "_" + std::to_string(to); };
    auto clean = [](int i) { return "clean_" + std::to_string(i); };

    std::ostringstream out;
    out << "// virus spreading on a " << p.m << "x" << p.n << " network\n";
    out << "smg\n\n";
    out << "const double a = " << real(p.a) << ";\n";
    out << "const double c = " << real(p.c) << ";\n\n";

    std::vector<std::string> attacker_actions, defender_actions;
    for (auto [f, t] : edges) attacker_actions.push_back("[" + attack(f, t) + "]");
    attacker_actions.push_back("[attacker_skip]");
    for (int i = 1; i < nodes; ++i) defender_actions.push_back("[" + clean(i) + "]");
    defender_actions.push_back("[defender_skip]");
    out << "player attacker\n  " << join(attacker_actions, ", ") << "\nendplayer\n\n";
    out << "player defender\n  " << join(defender_actions, ", ") << "\nendplayer\n\n";

    out << "module network\n";
    out << "  turn : [0..1] init 0;\n";
    for (int i = 0; i < nodes; ++i) out << "  " << node(i) << " : [0..1] init " << (i == 0 ? 1 : 0) << ";\n";
    out << '\n';
    std::vector<std::string> spreadable;
    for (auto [f, t] : edges) {
        auto cond = node(f) + "=1 & " + node(t) + "=0";
        spreadable.push_back("(" + cond + ")");
        out << "  [" << attack(f, t) << "] turn=0 & " << cond << " -> a : (" << node(t) << "'=1) & (turn'=1) + 1-a : (turn'=1);\n";
    }
    out << "  [attacker_skip] turn=0 & !(" << join(spreadable, " | ") << ") -> (turn'=1);\n";
    std::vector<std::string> cleanable;
    for (int i = 1; i < nodes; ++i) {
        cleanable.push_back(node(i));
        out << "  [" << clean(i) << "] turn=1 & " << node(i) << "=1 -> c : (" << node(i) << "'=0) & (turn'=0) + 1-c : (turn'=0);\n";
    }
    out << "  [defender_skip] turn=1 & " << join(cleanable, "+") << "=0 -> (turn'=0);\n";
    out << "endmodule\n\n";

    std::vector<std::string> all;
    for (int i = 0; i < nodes; ++i) all.push_back(node(i));
    out << "rewards \"infections\"\n  true : " << join(all, "+") << ";\nendrewards\n\n";
    out << "label \"all_infected\" = " << join(all, "+") << "=" << nodes << ";\n";
    return out.str();
}

std::string virus_property() { return "<<defender>> R{\"infections\"}min=? [ S ]"; }

std::string gen_ctf(const CtfParams& p) {
    if (p.N < 2) throw ParamError("grid side N must be at least 2");
    if (!(p.p_failure >= 0.0 && p.p_failure < 1.0)) throw ParamError("p_failure must lie in [0, 1)");

    std::ostringstream out;
    out << "// two robots collecting fuel on a " << p.N << "x" << p.N << " grid\n";
    out << "smg\n\n";
    out << "const int N = " << p.N << ";\n";
    out << "const double pf = " << real(p.p_failure) << ";\n\n";
    out << "player robot1\n  r1\nendplayer\n\n";
    out << "player robot2\n  r2\nendplayer\n\n";

    // robot k starts at its home corner and collects at the other one
    struct Dir {
        const char* name;
        int dx, dy;
    };
    const Dir dirs[] = {{"e", 1, 0}, {"s", 0, 1}, {"w", -1, 0}, {"n", 0, -1}};
    for (int k = 1; k <= 2; ++k) {
        const std::string id = std::to_string(k);
        const std::string x = "x" + id, y = "y" + id, carry = "carry" + id, got = "got" + id;
        const std::string home = k == 1 ? "0" : "N-1", away = k == 1 ? "N-1" : "0";
        const int mine = k - 1, next = 2 - k;
        out << "module r" << id << "\n";
        if (k == 1) out << "  turn : [0..1] init 0;\n";
        out << "  " << x << " : [0..N-1] init " << home << ";\n";
        out << "  " << y << " : [0..N-1] init " << home << ";\n";
        out << "  " << carry << " : [0..1] init 0;\n";
        out << "  " << got << " : [0..1] init 0;\n\n";
        for (const auto& d : dirs) {
            std::string nx = x, ny = y, bound;
            if (d.dx > 0) nx += "+1", bound = x + "<N-1";
            if (d.dx < 0) nx += "-1", bound = x + ">0";
            if (d.dy > 0) ny += "+1", bound = y + "<N-1";
            if (d.dy < 0) ny += "-1", bound = y + ">0";
            const std::string at_away = nx + "=" + away + " & " + ny + "=" + away;
            const std::string at_home = nx + "=" + home + " & " + ny + "=" + home;
            const std::string pickup = "(" + carry + "=0 & " + at_away + ")";
            out << "  [" << d.name << id << "] turn=" << mine << " & " << bound << " -> 1-pf : (" << x << "'=" << nx
                << ") & (" << y << "'=" << ny << ") & (" << carry << "'=" << pickup << " ? 1 : ((" << at_home
                << ") ? 0 : " << carry << ")) & (" << got << "'=" << pickup << " ? 1 : 0) & (turn'=" << next
                << ") + pf : (" << got << "'=0) & (turn'=" << next << ");\n";
        }
        out << "endmodule\n\n";
    }
    out << "rewards \"fuel\"\n  turn=1 & got1=1 : 1;\nendrewards\n\n";
    out << "label \"r1_at_target\" = x1=N-1 & y1=N-1;\n";
    out << "label \"r2_at_target\" = x2=0 & y2=0;\n";
    return out.str();
}

std::string gen_warehouse(const WarehouseParams& p) {
    if (p.n < 2) throw ParamError("warehouse needs at least two shelf columns");
    if (!(p.slip >= 0.0 && p.slip < 1.0)) throw ParamError("slip must lie in [0, 1)");
    if (!(p.lambda >= 0.0 && p.lambda <= 1.0)) throw ParamError("lambda must lie in [0, 1]");
    if (p.horizon < 1) throw ParamError("horizon must be at least 1");
    const int width = 2 * p.n + 1, height = 7;

    // shelves occupy the cells with odd x and odd y
    auto free_cell = [&](const std::string& cx, const std::string& cy) {
        std::vector<std::string> parts;
        for (int sx = 1; sx < width; sx += 2)
            for (int sy = 1; sy < height; sy += 2)
                parts.push_back("!(" + cx + "=" + std::to_string(sx) + " & " + cy + "=" + std::to_string(sy) + ")");
        return join(parts, " & ");
    };
    struct Dir {
        const char* name;
        int dx, dy;
    };
    const Dir dirs[] = {{"e", 1, 0}, {"s", 0, 1}, {"w", -1, 0}, {"n", 0, -1}};
    auto shift = [](const std::string& v, int d) { return d > 0 ? v + "+1" : d < 0 ? v + "-1" : v; };
    auto in_bounds = [&](const std::string& x, const std::string& y, const Dir& d) {
        if (d.dx > 0) return x + "<W";
        if (d.dx < 0) return x + ">0";
        if (d.dy > 0) return y + "<H";
        return y + ">0";
    };

    std::ostringstream out;
    out << "// warehouse with " << p.n << "x3 shelves, our robot against an adversarial robot\n";
    out << "smg\n\n";
    out << "const int W = " << width - 1 << ";\n";
    out << "const int H = " << height - 1 << ";\n";
    out << "const double slip = " << real(p.slip) << ";\n";
    out << "const double wait_penalty = " << real(p.waiting_penalty) << ";\n";
    out << "const double delivery = " << real(p.delivery_reward) << ";\n\n";
    out << "player shield\n  robot\nendplayer\n\n";
    out << "player adversary\n  other\nendplayer\n\n";

    out << "module robot\n";
    out << "  move : [0..1] init 0;\n";
    out << "  x1 : [0..W] init 0;\n";
    out << "  y1 : [0..H] init 0;\n";
    out << "  carry : [0..1] init 0;\n\n";
    for (const auto& d : dirs) {
        auto nx = shift("x1", d.dx), ny = shift("y1", d.dy);
        out << "  [" << d.name << "] move=0 & " << in_bounds("x1", "y1", d) << " & " << free_cell(nx, ny)
            << " -> (x1'=" << nx << ") & (y1'=" << ny << ") & (carry'=(" << nx << "=W & " << ny
            << "=H) ? 1 : ((" << nx << "=0 & " << ny << "=0) ? 0 : carry)) & (move'=1);\n";
    }
    out << "  [wait] move=0 -> (move'=1);\n";
    out << "endmodule\n\n";

    out << "module other\n";
    out << "  x2 : [0..W] init W;\n";
    out << "  y2 : [0..H] init 4;\n\n";
    for (const auto& d : dirs) {
        auto nx = shift("x2", d.dx), ny = shift("y2", d.dy);
        out << "  [" << d.name << "2] move=1 & " << in_bounds("x2", "y2", d) << " & " << free_cell(nx, ny)
            << " -> 1-slip : (x2'=" << nx << ") & (y2'=" << ny << ") & (move'=0) + slip : (move'=0);\n";
    }
    out << "endmodule\n\n";

    out << "label \"crash\" = x1=x2 & y1=y2;\n";
    out << "label \"delivered\" = x1=0 & y1=0 & carry=0;\n\n";

    // moving costs 1, waiting costs the penalty, a delivering move pays off
    out << "rewards \"cost\"\n";
    for (const auto& d : dirs) out << "  [" << d.name << "] true : 1;\n";
    out << "  [wait] true : wait_penalty;\n";
    out << "  [w] carry=1 & x1=1 & y1=0 : -delivery;\n";
    out << "  [n] carry=1 & x1=0 & y1=1 : -delivery;\n";
    out << "endrewards\n";
    return out.str();
}

std::string warehouse_safety_property(const WarehouseParams& params, bool post) {
    std::ostringstream out;
    out << (post ? "<PostSafety, " : "<PreSafety, ") << "lambda=" << value_to_string(Value{params.lambda})
        << "> <<shield>> Pmax=? [ G<=" << params.horizon << " !crash ]";
    return out.str();
}

}  // namespace smg::bench
