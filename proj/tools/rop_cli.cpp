// rop: solve a single instance, run a sweep to CSV, or cross-check the
// solvers against the brute-force oracles.
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rop/rop.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* problem_name(rop::Problem p) {
    switch (p) {
        case rop::Problem::P1: return "p1";
        case rop::Problem::P2: return "p2";
        case rop::Problem::P3: return "p3";
        case rop::Problem::P4: return "p4";
        case rop::Problem::P5: return "p5";
        case rop::Problem::P6: return "p6";
    }
    return "?";
}

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> n;
    std::optional<std::string> problem;
    int threads = 0;
};

rop::VerifyReport verify_dispatch(const rop::RunConfig& cfg, int n, std::uint64_t seed,
                                  int threads);
int oracle_check_after(const rop::RunConfig& cfg, int threads);

rop::RunConfig load_config(const CommonOpts& opts, bool config_required) {
    rop::RunConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = rop::parse_config(read_file(opts.config_path));
    } else if (config_required) {
        throw std::runtime_error("--config is required");
    }
    if (opts.problem) cfg.problem = rop::detail::parse_problem(*opts.problem, "--problem");
    if (opts.seed) {
        cfg.fading.seed = *opts.seed;
        cfg.has_seed = true;
    }
    if (opts.n) {
        if (*opts.n < 1) throw rop::ValidationError("--n must be >= 1");
        cfg.fading.n_realizations = *opts.n;
    }
    return cfg;
}

int run_solve(const CommonOpts& opts) {
    const rop::RunConfig cfg = load_config(opts, true);
    const auto blocks = rop::sample_blocks(cfg.fading);
    const rop::AlphaSearchConfig acfg{cfg.alpha_points, cfg.alpha_max};
    const rop::SystemParams& sp = cfg.params;
    double capacity = 0.0, alpha = 0.0, outage = 0.0, lambda = 0.0, mu = 0.0;
    bool feasible = true;
    switch (cfg.problem) {
        case rop::Problem::P1:
        case rop::Problem::P2: {
            const auto row = rop::detail::solve_peak_row(blocks, sp, cfg.problem, opts.threads);
            capacity = row.capacity_bits;
            alpha = row.alpha_star;
            outage = row.outage;
            break;
        }
        case rop::Problem::P3:
        case rop::Problem::P4: {
            const auto sol = cfg.problem == rop::Problem::P3
                                 ? rop::solve_p3(blocks, sp, acfg, opts.threads)
                                 : rop::solve_p4(blocks, sp, acfg, opts.threads);
            capacity = sol.capacity;
            alpha = sol.alpha;
            lambda = sol.inner.dual.lambda;
            feasible = sol.feasible;
            if (feasible) outage = rop::detail::rate_violation_fraction(blocks, sol.inner.profile, sp);
            break;
        }
        case rop::Problem::P5: {
            const auto sol = rop::solve_p5(blocks, sp, acfg, opts.threads);
            capacity = sol.capacity;
            alpha = sol.alpha;
            outage = sol.outage;
            feasible = sol.feasible;
            break;
        }
        case rop::Problem::P6: {
            const auto sol = rop::solve_p6(blocks, sp, acfg, rop::P6Config{}, opts.threads);
            capacity = sol.capacity;
            alpha = sol.alpha;
            outage = sol.outage;
            lambda = sol.dual.lambda;
            mu = sol.dual.mu;
            feasible = sol.feasible;
            break;
        }
    }
    std::printf("problem        %s\n", problem_name(cfg.problem));
    std::printf("n, seed        %d, %llu\n", cfg.fading.n_realizations,
                static_cast<unsigned long long>(cfg.fading.seed));
    std::printf("feasible       %s\n", feasible ? "yes" : "no");
    std::printf("capacity_bits  %.9g\n", capacity);
    std::printf("alpha_star     %.9g\n", alpha);
    std::printf("outage         %.9g\n", outage);
    std::printf("lambda, mu     %.9g, %.9g\n", lambda, mu);
    if (!feasible) return 1;
    return oracle_check_after(cfg, opts.threads);
}

int run_sweep_cmd(const CommonOpts& opts, const std::string& out_path, bool timing) {
    const rop::RunConfig cfg = load_config(opts, true);
    if (!cfg.has_seed)
        throw rop::ValidationError("sweep configs must pin a seed (config key 'seed' or --seed)");
    if (cfg.x_values.empty())
        throw rop::ValidationError("sweep configs must set x_values");
    const auto result = rop::run_sweep(rop::to_sweep_spec(cfg), cfg.fading, opts.threads,
                                       timing || cfg.timing);
    rop::write_csv(result, out_path);
    int infeasible = 0;
    for (const auto& r : result.rows) infeasible += r.feasible ? 0 : 1;
    std::printf("wrote %zu rows to %s (%d infeasible)\n", result.rows.size(), out_path.c_str(),
                infeasible);
    return oracle_check_after(cfg, opts.threads);
}

int run_verify(const CommonOpts& opts) {
    rop::RunConfig cfg = load_config(opts, false);
    const int n = cfg.fading.n_realizations == 10000 && !opts.n ? 1000 : cfg.fading.n_realizations;
    const auto rep = verify_dispatch(cfg, n, cfg.fading.seed, opts.threads);
    std::printf("[%s] verify %s: %s (cases=%d)\n", rep.pass ? "PASS" : "FAIL",
                problem_name(cfg.problem), rep.detail.c_str(), rep.cases);
    return rep.pass ? 0 : 1;
}

rop::VerifyReport verify_dispatch(const rop::RunConfig& cfg, int n, std::uint64_t seed,
                                  int threads) {
    rop::VerifyReport rep;
    switch (cfg.problem) {
        case rop::Problem::P1:
            rep = rop::verify_peak_vs_oracle(rop::EnergyModel::Ideal, n, seed, cfg.params,
                                             threads);
            break;
        case rop::Problem::P2:
            rep = rop::verify_peak_vs_oracle(rop::EnergyModel::Practical, n, seed, cfg.params,
                                             threads);
            if (rep.pass) {
                const auto mono =
                    rop::verify_intersection_monotonicity(std::min(n, 1000), seed + 1, cfg.params);
                rep.pass = mono.pass;
                rep.detail += "; intersection monotonicity: " + mono.detail;
            }
            break;
        case rop::Problem::P3:
            rep = rop::verify_average_vs_oracle(rop::EnergyModel::Ideal, 20, seed, threads);
            break;
        case rop::Problem::P4:
            rep = rop::verify_average_vs_oracle(rop::EnergyModel::Practical, 20, seed, threads);
            break;
        case rop::Problem::P5:
            rep = rop::verify_p5_pareto(20, seed, threads);
            break;
        case rop::Problem::P6:
            rep = rop::verify_p6b_vs_grid(std::min(n, 1000), seed, threads);
            break;
    }
    return rep;
}

// `oracle_check = true` runs the problem's oracle campaign after a command.
int oracle_check_after(const rop::RunConfig& cfg, int threads) {
    if (!cfg.oracle_check) return 0;
    const int n = std::min(cfg.fading.n_realizations, 300);
    const auto rep = verify_dispatch(cfg, n, cfg.fading.seed, threads);
    std::printf("[%s] oracle check %s: %s (cases=%d)\n", rep.pass ? "PASS" : "FAIL",
                problem_name(cfg.problem), rep.detail.c_str(), rep.cases);
    return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transmit power and reflection coefficient optimizer for the ROP "
                 "spectrum sharing model"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string out_path;
    bool timing = false;

    auto add_common = [&](CLI::App* cmd, bool with_config) {
        if (with_config) cmd->add_option("--config", opts.config_path, "flat key=value config file");
        cmd->add_option("--seed", opts.seed, "RNG seed override");
        cmd->add_option("--n", opts.n, "number of channel realizations");
        cmd->add_option("--problem", opts.problem, "problem p1..p6 (overrides config)");
        cmd->add_option("--threads", opts.threads,
                        "worker threads (default: ROP_THREADS or hardware)");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve one instance and print the solution");
    add_common(solve, true);
    CLI::App* sweep = app.add_subcommand("sweep", "run a sweep and write CSV");
    add_common(sweep, true);
    sweep->add_option("--out", out_path, "output CSV path")->required();
    sweep->add_flag("--timing", timing, "record wall_time_ms (breaks byte-identical reruns)");
    CLI::App* verify = app.add_subcommand("verify", "cross-check a solver against its oracle");
    add_common(verify, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (solve->parsed()) return run_solve(opts);
        if (sweep->parsed()) return run_sweep_cmd(opts, out_path, timing);
        if (verify->parsed()) return run_verify(opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
