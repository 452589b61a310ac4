// Monte Carlo machinery: seeded Rayleigh (exponential power gain) sampling,
// sweep execution over a shared channel sample, and the CSV contract.
//
// Reproducibility contract: gains come from one mt19937_64 stream seeded by
// FadingSpec::seed, with the five gains drawn per block in the fixed order
// h1, g1, f, h2, g2 via u = (next() >> 11) * 2^-53, gain = -log1p(-u).
// This avoids std::exponential_distribution, whose output is
// implementation-defined, so CSVs are byte-identical across toolchains.
#ifndef ROP_EXPERIMENTS_HPP
#define ROP_EXPERIMENTS_HPP

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include "rop/model.hpp"
#include "rop/solvers_average.hpp"
#include "rop/solvers_outage.hpp"
#include "rop/solvers_peak.hpp"
#include "rop/threading.hpp"

namespace rop {

enum class Problem { P1, P2, P3, P4, P5, P6 };
enum class SweepAxis { Ppk, Pav, EpsOut };
enum class FadingDistribution { RayleighUnitMean };

struct FadingSpec {
    FadingDistribution distribution = FadingDistribution::RayleighUnitMean;
    int n_realizations = 10000;
    std::uint64_t seed = 1;
};

inline std::vector<ChannelState> sample_blocks(const FadingSpec& spec) {
    if (spec.n_realizations < 1)
        throw ValidationError("n_realizations must be >= 1");
    std::mt19937_64 rng(spec.seed);
    const auto draw = [&rng]() {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return -std::log1p(-u);  // unit-mean exponential
    };
    std::vector<ChannelState> blocks(static_cast<std::size_t>(spec.n_realizations));
    for (auto& ch : blocks) {
        ch.h1 = draw();
        ch.g1 = draw();
        ch.f = draw();
        ch.h2 = draw();
        ch.g2 = draw();
    }
    return blocks;
}

struct SweepSpec {
    Problem problem = Problem::P1;
    SweepAxis x_axis = SweepAxis::Ppk;
    std::vector<double> x_values;
    SystemParams params;
    int alpha_points = 101;           // sweep-level default; library default is 1001
    double alpha_max = 1.0 - 1e-9;
};

struct SweepRow {
    double x = 0.0;
    double capacity_bits = 0.0;
    double outage = 0.0;
    double alpha_star = 0.0;
    double lambda = 0.0;
    double mu = 0.0;
    double wall_time_ms = 0.0;
    bool feasible = true;
};

struct ExperimentResult {
    std::vector<SweepRow> rows;
};

namespace detail {

// Fraction of blocks whose primary rate is strictly below gamma. Blocks
// sitting exactly on the rate boundary satisfy the hard constraint and are
// not counted; the margin keeps the count stable under rounding.
inline double rate_violation_fraction(std::span<const ChannelState> blocks,
                                      std::span<const BlockDecision> profile,
                                      const SystemParams& sp) {
    if (blocks.empty()) return 0.0;
    std::size_t count = 0;
    const double threshold = sp.gamma * (1.0 - 1e-9) - 1e-12;
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (primary_rate(blocks[i], profile[i], sp) < threshold) ++count;
    return static_cast<double>(count) / static_cast<double>(blocks.size());
}

inline SweepRow solve_peak_row(std::span<const ChannelState> blocks, const SystemParams& sp,
                               Problem problem, int threads) {
    std::vector<BlockDecision> profile(blocks.size());
    parallel_for(blocks.size(), threads, [&](std::size_t i) {
        profile[i] = problem == Problem::P1 ? solve_p1(blocks[i], sp).decision
                                            : solve_p2(blocks[i], sp).decision;
    });
    double cap_sum = 0.0, alpha_sum = 0.0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        cap_sum += secondary_rate(blocks[i], profile[i], sp);
        alpha_sum += profile[i].alpha;
    }
    SweepRow row;
    const double nn = static_cast<double>(blocks.size());
    row.capacity_bits = cap_sum / nn;
    row.alpha_star = alpha_sum / nn;  // per-block alpha is dynamic; report its mean
    row.outage = rate_violation_fraction(blocks, profile, sp);
    return row;
}

}  // namespace detail

// Runs one solved instance per x value on a shared sample. Infeasible points
// are recorded (capacity_bits = nan, feasible = false) and the sweep
// continues. wall_time_ms is 0 unless measure_time is set, so default output
// is byte-identical across reruns and thread counts.
inline ExperimentResult run_sweep(const SweepSpec& spec, const FadingSpec& fading,
                                  int threads = 0, bool measure_time = false) {
    if (spec.x_values.empty()) throw ValidationError("x_values must not be empty");
    for (std::size_t i = 1; i < spec.x_values.size(); ++i)
        if (!(spec.x_values[i] > spec.x_values[i - 1]))
            throw ValidationError("x_values must be strictly increasing");
    const bool peak_problem = spec.problem == Problem::P1 || spec.problem == Problem::P2;
    const bool avg_problem = spec.problem == Problem::P3 || spec.problem == Problem::P4;
    const bool outage_problem = spec.problem == Problem::P5 || spec.problem == Problem::P6;
    switch (spec.x_axis) {
        case SweepAxis::Ppk:
            if (!(peak_problem || spec.problem == Problem::P5))
                throw ValidationError("x_axis p_pk is valid for p1, p2, p5 only");
            break;
        case SweepAxis::Pav:
            if (!(avg_problem || spec.problem == Problem::P6))
                throw ValidationError("x_axis p_av is valid for p3, p4, p6 only");
            break;
        case SweepAxis::EpsOut:
            if (!outage_problem)
                throw ValidationError("x_axis eps_out is valid for p5, p6 only");
            break;
    }
    if (threads <= 0) threads = default_threads();
    const auto blocks = sample_blocks(fading);
    const AlphaSearchConfig acfg{spec.alpha_points, spec.alpha_max};

    ExperimentResult result;
    result.rows.reserve(spec.x_values.size());
    for (const double x : spec.x_values) {
        SystemParams sp = spec.params;
        switch (spec.x_axis) {
            case SweepAxis::Ppk: sp.p_pk = x; break;
            case SweepAxis::Pav: sp.p_av = x; break;
            case SweepAxis::EpsOut: sp.eps_out = x; break;
        }
        sp.validate();
        const auto t0 = std::chrono::steady_clock::now();
        SweepRow row;
        switch (spec.problem) {
            case Problem::P1:
            case Problem::P2:
                row = detail::solve_peak_row(blocks, sp, spec.problem, threads);
                break;
            case Problem::P3:
            case Problem::P4: {
                const auto sol = spec.problem == Problem::P3 ? solve_p3(blocks, sp, acfg, threads)
                                                             : solve_p4(blocks, sp, acfg, threads);
                row.capacity_bits = sol.capacity;
                row.alpha_star = sol.alpha;
                row.lambda = sol.inner.dual.lambda;
                row.feasible = sol.feasible;
                if (sol.feasible)
                    row.outage = detail::rate_violation_fraction(blocks, sol.inner.profile, sp);
                break;
            }
            case Problem::P5: {
                const auto sol = solve_p5(blocks, sp, acfg, threads);
                row.capacity_bits = sol.capacity;
                row.alpha_star = sol.alpha;
                row.outage = sol.outage;
                row.feasible = sol.feasible;
                break;
            }
            case Problem::P6: {
                const auto sol = solve_p6(blocks, sp, acfg, P6Config{}, threads);
                row.capacity_bits = sol.capacity;
                row.alpha_star = sol.alpha;
                row.outage = sol.outage;
                row.lambda = sol.dual.lambda;
                row.mu = sol.dual.mu;
                row.feasible = sol.feasible;
                break;
            }
        }
        row.x = x;
        if (measure_time) {
            const auto t1 = std::chrono::steady_clock::now();
            row.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
        result.rows.push_back(row);
    }
    return result;
}

namespace detail {

inline void append_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip
    out.append(buf, res.ptr);
}

}  // namespace detail

inline std::string to_csv(const ExperimentResult& result) {
    std::string out = "x,capacity_bits,outage,alpha_star,lambda,mu,wall_time_ms\n";
    for (const auto& r : result.rows) {
        detail::append_double(out, r.x);
        for (const double v : {r.capacity_bits, r.outage, r.alpha_star, r.lambda, r.mu,
                               r.wall_time_ms}) {
            out.push_back(',');
            detail::append_double(out, v);
        }
        out.push_back('\n');
    }
    return out;
}

// Atomic CSV write: temp file in the target directory, then rename.
inline void write_csv(const ExperimentResult& result, const std::filesystem::path& path) {
    const std::string body = to_csv(result);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::FILE* f = std::fopen(tmp.string().c_str(), "wb");
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        const std::size_t written = std::fwrite(body.data(), 1, body.size(), f);
        const int rc = std::fclose(f);
        if (written != body.size() || rc != 0)
            throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace rop

#endif  // ROP_EXPERIMENTS_HPP
