#include "smg/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "smg/bench_models.hpp"
#include "smg/model.hpp"
#include "smg/oracle.hpp"
#include "smg/property.hpp"
#include "smg/shield.hpp"
#include "smg/solver.hpp"

namespace smg::cli {

namespace {

struct RunConfig {
    std::string model_path;
    std::string constants;
    std::string prop;
    std::string props_file;
    SolverParams params;
    std::string export_shield;
    std::string export_shield_tsv;
    std::string export_strategy;
    std::string export_game;
    bool fix_deadlocks = false;
    bool stats = false;
    bool oracle = false;
};

// Errors that carry their exit code up to run().
struct Failure {
    int code;
    std::string message;
};

std::string sig6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{kBuildError, std::string("cannot open ") + what + " '" + path + "'"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw Failure{kBuildError, "cannot write '" + path + "'"};
}

void add_common(CLI::App& cmd, RunConfig& cfg) {
    cmd.add_option("-m,--model", cfg.model_path, "Model file")->required();
    cmd.add_option("-p,--prop", cfg.prop, "Property string");
    cmd.add_option("--props-file", cfg.props_file, "File with one property per line");
    cmd.add_option("--const", cfg.constants, "Constant overrides, e.g. a=0.5,c=0");
    cmd.add_option("--epsilon", cfg.params.epsilon, "Convergence threshold")->check(CLI::PositiveNumber);
    cmd.add_option("--max-iter", cfg.params.max_iterations, "Iteration cap")->check(CLI::PositiveNumber);
    cmd.add_option("--lra-window", cfg.params.lra_window, "Mean-payoff gain window")->check(CLI::PositiveNumber);
    cmd.add_option("--lra-tol", cfg.params.lra_gain_tolerance, "Mean-payoff gain tolerance")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--threads", cfg.params.threads, "Worker threads (0 = all cores)");
    cmd.add_option("--export-strategy", cfg.export_strategy, "Write the coalition strategy");
    cmd.add_option("--export-game", cfg.export_game, "Write the explicit game");
    cmd.add_flag("--fix-deadlocks", cfg.fix_deadlocks, "Add self-loops to deadlock states");
    cmd.add_flag("--stats", cfg.stats, "Print model and solver statistics to stderr");
    cmd.add_flag("--oracle", cfg.oracle, "Cross-check small games by strategy enumeration");
}

struct Loaded {
    StochasticGame game;
    std::vector<Property> properties;
};

Loaded load(const RunConfig& cfg, std::ostream& err) {
    auto text = read_file(cfg.model_path, "model file");
    Loaded l;
    ModelAst ast;
    try {
        ast = parse_model(text);
    } catch (const ParseError& e) {
        throw Failure{kParseError, cfg.model_path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) +
                                       ": " + e.message()};
    }
    try {
        if (!cfg.prop.empty()) {
            if (!cfg.props_file.empty()) err << "warning: --prop overrides --props-file\n";
            l.properties.push_back(parse_property(cfg.prop));
        } else if (!cfg.props_file.empty()) {
            l.properties = parse_properties_file(read_file(cfg.props_file, "properties file"));
        }
    } catch (const ParseError& e) {
        throw Failure{kParseError, "property:" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " +
                                       e.message()};
    }
    if (l.properties.empty()) throw Failure{kParseError, "no property given (use --prop or --props-file)"};

    ConstantOverrides overrides;
    try {
        if (!cfg.constants.empty()) overrides = parse_constant_overrides(cfg.constants);
    } catch (const std::exception& e) {
        throw Failure{kParseError, std::string("bad constant overrides: ") + e.what()};
    }
    BuildOptions options;
    options.fix_deadlocks = cfg.fix_deadlocks;
    try {
        l.game = build_game(ast, overrides, options);
    } catch (const BuildError& e) {
        throw Failure{kBuildError, std::string("build error: ") + e.what()};
    }
    if (!cfg.export_game.empty()) write_file(cfg.export_game, dump_game(l.game));
    if (cfg.stats) {
        err << "States: " << l.game.num_states() << "\n";
        err << "Choices: " << l.game.num_choices() << "\n";
        err << "Transitions: " << l.game.num_transitions() << "\n";
    }
    return l;
}

BoundProperty bind_or_fail(const Property& p, const StochasticGame& game) {
    try {
        return bind(p, game);
    } catch (const BindError& e) {
        throw Failure{kParseError, std::string("property: ") + e.what()};
    }
}

std::string strategy_text(const StochasticGame& game, const StrategyProfile& strategy) {
    std::string out;
    for (StateIndex s = 0; s < game.num_states(); ++s) {
        if (!strategy.covers(s)) continue;
        const auto& c = game.states[s].choices[*strategy.choice[s]];
        out += std::to_string(s) + " " + std::to_string(c.action) + " " + game.action_label(c) + "\n";
    }
    return out;
}

std::optional<oracle::Objective> oracle_objective(const BoundProperty& bp) {
    switch (bp.property.path.kind) {
        case PathKind::Finally: return oracle::Objective::reach(bp.right);
        case PathKind::Until: return oracle::Objective::until(bp.left, bp.right);
        case PathKind::GloballyBounded: return oracle::Objective::bounded_safety(bp.right, bp.property.path.bound);
        case PathKind::SteadyState: return oracle::Objective::mean_payoff(*bp.reward);
        default: return std::nullopt;
    }
}

void run_oracle(const StochasticGame& game, const BoundProperty& bp, std::ostream& out, std::ostream& err) {
    auto objective = oracle_objective(bp);
    if (!objective) {
        err << "oracle: path formula not supported, skipped\n";
        return;
    }
    try {
        auto v = oracle::value(game, bp.coalition, *objective, bp.direction);
        out << "Oracle: " << sig6(v[game.initial_state]) << "\n";
    } catch (const oracle::BudgetExceeded& e) {
        err << "oracle: " << e.what() << "\n";
    }
}

struct Solved {
    BoundProperty bound;
    SolveResult result;
};

Solved solve_one(const RunConfig& cfg, const StochasticGame& game, const Property& p, std::ostream& out,
                 std::ostream& err) {
    Solved s{bind_or_fail(p, game), {}};
    auto start = std::chrono::steady_clock::now();
    try {
        s.result = evaluate(game, s.bound, cfg.params);
    } catch (const SolverError& e) {
        throw Failure{kParseError, std::string("solver: ") + e.what()};
    }
    std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    out << "Property: " << print_property(p) << "\n";
    out << "Result: " << sig6(s.result.values[game.initial_state]) << (s.result.converged ? "" : " (not converged)")
        << "\n";
    out << "Iterations: " << s.result.iterations << "\n";
    err << "Time: " << elapsed.count() << " s\n";
    if (cfg.stats) err << "Solver iterations: " << s.result.iterations << "\n";
    if (cfg.oracle) run_oracle(game, s.bound, out, err);
    return s;
}

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto loaded = load(cfg, err);
    bool converged = true;
    std::optional<Solved> last;
    for (const auto& p : loaded.properties) {
        last = solve_one(cfg, loaded.game, p, out, err);
        converged = converged && last->result.converged;
    }
    if (!cfg.export_strategy.empty()) write_file(cfg.export_strategy, strategy_text(loaded.game, last->result.strategy));
    return converged ? kOk : kNotConverged;
}

int cmd_shield(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto loaded = load(cfg, err);
    for (const auto& p : loaded.properties)
        if (!p.shield)
            throw Failure{kParseError, "property '" + print_property(p) +
                                           "' has no shield annotation; prefix it with <PreSafety, gamma=...>, "
                                           "<PostSafety, lambda=...> or <Optimal>"};
    const auto& game = loaded.game;
    std::string text, tsv;
    std::ostringstream summary;
    bool converged = true;
    std::optional<Solved> last;
    for (const auto& p : loaded.properties) {
        last = solve_one(cfg, game, p, summary, err);
        converged = converged && last->result.converged;
        const auto& ann = *p.shield;
        const auto& bp = last->bound;
        if (!text.empty()) text += "\n";
        switch (ann.kind) {
            case ShieldKind::PreSafety: {
                auto sh = synthesize_pre_safety(game, bp.coalition, last->result, *ann.threshold, p.path.bound);
                std::size_t blocked = 0;
                for (const auto& row : sh.rows) blocked += row.blocked;
                summary << "Shield states: " << sh.rows.size() << "\nBlocked actions: " << blocked << "\n";
                text += render_shield(sh, game);
                tsv += export_shield_tsv(sh, game);
                break;
            }
            case ShieldKind::PostSafety: {
                auto sh = synthesize_post_safety(game, bp.coalition, last->result, *ann.threshold, p.path.bound);
                summary << "Shield states: " << sh.rows.size() << "\nCorrected actions: " << sh.corrections() << "\n";
                text += render_shield(sh, game);
                tsv += export_shield_tsv(sh, game);
                break;
            }
            case ShieldKind::Optimal: {
                auto sh = synthesize_optimal(game, bp.coalition, last->result);
                summary << "Shield states: " << sh.rows.size() << "\nCorrected actions: " << sh.corrections() << "\n";
                text += render_shield(sh, game);
                tsv += export_shield_tsv(sh, game);
                break;
            }
        }
    }
    if (!cfg.export_shield_tsv.empty()) write_file(cfg.export_shield_tsv, tsv);
    if (!cfg.export_strategy.empty()) write_file(cfg.export_strategy, strategy_text(game, last->result.strategy));
    if (cfg.export_shield.empty()) {
        out << text;
        err << summary.str();
    } else {
        write_file(cfg.export_shield, text);
        out << summary.str();
    }
    return converged ? kOk : kNotConverged;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    // single-dash long option kept for compatibility with model-checker habits
    for (auto& a : args)
        if (a == "-const") a = "--const";

    CLI::App app{"Shield and strategy synthesis for stochastic multi-player games", "smgshield"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* check = app.add_subcommand("check", "Evaluate properties and print their values");
    add_common(*check, cfg);

    auto* shield = app.add_subcommand("shield", "Synthesize shields for annotated properties");
    add_common(*shield, cfg);
    shield->add_option("--export-shield", cfg.export_shield, "Write the rendered shield here instead of stdout");
    shield->add_option("--export-shield-tsv", cfg.export_shield_tsv, "Write a tab-separated shield export");

    auto* generate = app.add_subcommand("generate", "Emit a case-study model");
    std::string kind, output;
    bool print = false;
    bench::VirusParams virus;
    bench::CtfParams ctf;
    bench::WarehouseParams warehouse;
    int grid_n = -1;
    generate->add_option("kind", kind, "virus, ctf or warehouse")->required();
    generate->add_option("--m", virus.m, "Virus grid width");
    generate->add_option("--n", grid_n, "Virus grid height, CTF grid side or warehouse shelf columns");
    generate->add_option("--a", virus.a, "Virus attack probability");
    generate->add_option("--c", virus.c, "Virus clean probability");
    generate->add_option("--pfail", ctf.p_failure, "CTF move failure probability");
    generate->add_option("--slip", warehouse.slip, "Warehouse adversary slip probability");
    generate->add_option("--wait-penalty", warehouse.waiting_penalty, "Warehouse waiting penalty");
    generate->add_option("-o,--output", output, "Output file");
    generate->add_flag("--print", print, "Write to stdout");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kParseError;
    }

    try {
        if (check->parsed()) return cmd_check(cfg, out, err);
        if (shield->parsed()) return cmd_shield(cfg, out, err);

        std::string text;
        try {
            if (kind == "virus") {
                if (grid_n >= 0) virus.n = grid_n;
                text = bench::gen_virus(virus);
            } else if (kind == "ctf") {
                if (grid_n >= 0) ctf.N = grid_n;
                text = bench::gen_ctf(ctf);
            } else if (kind == "warehouse") {
                if (grid_n >= 0) warehouse.n = grid_n;
                text = bench::gen_warehouse(warehouse);
            } else {
                throw Failure{kParseError, "unknown model kind '" + kind + "' (expected virus, ctf or warehouse)"};
            }
        } catch (const bench::ParamError& e) {
            throw Failure{kParseError, e.what()};
        }
        if (print || output.empty()) out << text;
        if (!output.empty()) write_file(output, text);
        return kOk;
    } catch (const Failure& f) {
        err << "error: " << f.message << "\n";
        return f.code;
    }
}

}  // namespace smg::cli
