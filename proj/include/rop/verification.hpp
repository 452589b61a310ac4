// Solver-vs-oracle verification campaigns shared by `rop verify` and the
// acceptance suite. Each campaign runs on seeded Rayleigh draws and reports
// worst-case gaps against its documented tolerance.
#ifndef ROP_VERIFICATION_HPP
#define ROP_VERIFICATION_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "rop/experiments.hpp"
#include "rop/model.hpp"
#include "rop/oracle.hpp"
#include "rop/solvers_average.hpp"
#include "rop/solvers_outage.hpp"
#include "rop/solvers_peak.hpp"
#include "rop/threading.hpp"

namespace rop {

struct VerifyReport {
    bool pass = true;
    double max_gap = 0.0;      // worst per-case gap, in the campaign's units
    double mean_gap = 0.0;
    double tolerance = 0.0;
    int cases = 0;
    std::string detail;
};

namespace detail {

inline double exp_draw(std::mt19937_64& rng) {
    return -std::log1p(-static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline double uniform_draw(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Closed-form peak-power solutions against the exhaustive per-block grid
// oracle. Checks solver rate >= oracle rate - delta_grid per block
// (delta_grid is the one-cell Lipschitz bound of the rate on the grid) and
// that the mean absolute gap stays below 1e-3 bits.
inline VerifyReport verify_peak_vs_oracle(EnergyModel em, int n_blocks, std::uint64_t seed,
                                          const SystemParams& sp, int threads = 0,
                                          int p_points = 2001, int alpha_points = 1001) {
    const auto blocks = sample_blocks(FadingSpec{FadingDistribution::RayleighUnitMean, n_blocks,
                                                 seed});
    const oracle::GridSpec grid{p_points, alpha_points, sp.p_pk};
    const double dp = sp.p_pk / (p_points - 1);
    const double da = 1.0 / (alpha_points - 1);
    std::vector<double> gaps(blocks.size(), 0.0);
    std::vector<char> cell_ok(blocks.size(), 1);
    std::vector<double> residuals(blocks.size(), 0.0);
    parallel_for(blocks.size(), threads, [&](std::size_t i) {
        const ChannelState& ch = blocks[i];
        const PeakSolution sol = em == EnergyModel::Ideal ? solve_p1(ch, sp) : solve_p2(ch, sp);
        const double solver_rate = secondary_rate(ch, sol.decision, sp);
        const auto ref = oracle::oracle_per_block(ch, sp, em, grid);
        const double lipschitz = ch.g1 * ch.f / (sp.sigma_sr_sq * std::numbers::ln2) *
                                 (dp + da * sp.p_pk);
        gaps[i] = std::abs(solver_rate - ref.rate);
        cell_ok[i] = solver_rate >= ref.rate - lipschitz ? 1 : 0;
        if (em == EnergyModel::Practical && ch.f > 0.0) {
            if (const auto ahat = alpha_pk(ch, sp)) {
                residuals[i] = std::abs(
                    sp.eta_st * (1.0 - *ahat) * ch.f * sp.p_pk -
                    (sp.eps_b +
                     sp.u * std::log2(1.0 + ch.g1 * *ahat * ch.f * sp.p_pk / sp.sigma_sr_sq)));
            }
        }
    });
    VerifyReport rep;
    rep.cases = static_cast<int>(blocks.size());
    rep.tolerance = 1e-3;
    double sum = 0.0;
    double max_residual = 0.0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        sum += gaps[i];
        rep.max_gap = std::max(rep.max_gap, gaps[i]);
        if (!cell_ok[i]) rep.pass = false;
        max_residual = std::max(max_residual, residuals[i]);
    }
    rep.mean_gap = sum / static_cast<double>(blocks.size());
    if (rep.mean_gap > 1e-3) rep.pass = false;
    if (em == EnergyModel::Practical && max_residual > 1e-8) rep.pass = false;
    rep.detail = "mean rate gap " + std::to_string(rep.mean_gap) + " bits, max " +
                 std::to_string(rep.max_gap) +
                 (em == EnergyModel::Practical
                      ? ", max curve-intersection residual " + std::to_string(max_residual)
                      : "");
    return rep;
}

// Energy-curve intersections: the reflected power alpha_B p grows strictly
// with the transmit power whenever both intersection roots exist.
inline VerifyReport verify_intersection_monotonicity(int n_cases, std::uint64_t seed, const SystemParams& sp) {
    std::mt19937_64 rng(seed);
    VerifyReport rep;
    rep.tolerance = 1e-12;
    double worst = std::numeric_limits<double>::infinity();
    int done = 0;
    int attempts = 0;
    while (done < n_cases && attempts < 100 * n_cases) {
        ++attempts;
        ChannelState ch{detail::exp_draw(rng), detail::exp_draw(rng), detail::exp_draw(rng),
                        detail::exp_draw(rng), detail::exp_draw(rng)};
        if (!(ch.f > 0.0)) continue;
        const double p_min = sp.eps_b / (sp.eta_st * ch.f) * 1.05 + 1e-6;
        if (p_min >= sp.p_pk) continue;
        double p1 = detail::uniform_draw(rng, p_min, sp.p_pk);
        double p2 = detail::uniform_draw(rng, p_min, sp.p_pk);
        if (p1 == p2) continue;
        if (p1 > p2) std::swap(p1, p2);
        const auto a1 = alpha_intersection(ch, sp, p1);
        const auto a2 = alpha_intersection(ch, sp, p2);
        if (!a1 || !a2) continue;
        ++done;
        worst = std::min(worst, *a2 * p2 - *a1 * p1);
    }
    rep.cases = done;
    rep.max_gap = done > 0 ? -worst : 0.0;  // positive means a violation
    rep.pass = done >= n_cases && worst > -1e-12;
    rep.detail = "min(a_B2 p2 - a_B1 p1) = " + std::to_string(worst) + " over " +
                 std::to_string(done) + " pairs";
    return rep;
}

// Average-power waterfill solutions on random 4-state desk instances against
// the exhaustive budgeted grid oracle: capacity within 1e-2 bits,
// complementary slackness within 1e-3 P_av, mean power within budget.
inline VerifyReport verify_average_vs_oracle(EnergyModel em, int n_instances, std::uint64_t seed,
                                             int threads = 0) {
    std::mt19937_64 rng(seed);
    VerifyReport rep;
    rep.tolerance = 1e-2;
    struct Instance {
        std::vector<ChannelState> blocks;
        SystemParams sp;
        double alpha_bar;
    };
    std::vector<Instance> instances;
    while (static_cast<int>(instances.size()) < n_instances) {
        Instance inst;
        inst.blocks.resize(4);
        for (auto& ch : inst.blocks)
            ch = ChannelState{detail::exp_draw(rng), detail::exp_draw(rng), detail::exp_draw(rng),
                              detail::exp_draw(rng), detail::exp_draw(rng)};
        inst.sp.gamma = 1.0;
        inst.sp.eps_st = detail::uniform_draw(rng, 0.05, 0.3);
        inst.sp.eps_b = inst.sp.eps_st;
        inst.alpha_bar = detail::uniform_draw(rng, 0.15, 0.6);
        const auto floors = em == EnergyModel::Ideal
                                ? detail::floors_p3(inst.blocks, inst.sp, inst.alpha_bar)
                                : detail::floors_p4(inst.blocks, inst.sp, inst.alpha_bar);
        double floor_mean = 0.0;
        int feasible_blocks = 0;
        bool ok = true;
        for (const auto& fl : floors) {
            if (fl) {
                floor_mean += *fl / 4.0;
                ++feasible_blocks;
            }
        }
        if (!std::isfinite(floor_mean) || feasible_blocks < 2) ok = false;
        inst.sp.p_av = std::max(1.0, floor_mean * detail::uniform_draw(rng, 1.8, 3.5));
        if (ok) instances.push_back(std::move(inst));
    }
    std::vector<double> cap_gap(instances.size(), 0.0);
    std::vector<double> slack(instances.size(), 0.0);
    std::vector<double> over_budget(instances.size(), 0.0);
    parallel_for(instances.size(), threads, [&](std::size_t i) {
        const auto& inst = instances[i];
        const auto sol = em == EnergyModel::Ideal
                             ? solve_p3a(inst.blocks, inst.sp, inst.alpha_bar)
                             : solve_p4a(inst.blocks, inst.sp, inst.alpha_bar);
        const auto floors = em == EnergyModel::Ideal
                                ? detail::floors_p3(inst.blocks, inst.sp, inst.alpha_bar)
                                : detail::floors_p4(inst.blocks, inst.sp, inst.alpha_bar);
        const auto ref = oracle::oracle_average(inst.blocks, inst.sp, inst.alpha_bar, floors,
                                                4.0 * inst.sp.p_av);
        cap_gap[i] = std::abs(sol.capacity - ref.capacity);
        slack[i] = std::abs(sol.dual.lambda * (sol.mean_power - inst.sp.p_av)) / inst.sp.p_av;
        over_budget[i] = sol.mean_power / inst.sp.p_av - 1.0;
    });
    for (std::size_t i = 0; i < instances.size(); ++i) {
        rep.max_gap = std::max(rep.max_gap, cap_gap[i]);
        rep.mean_gap += cap_gap[i] / static_cast<double>(instances.size());
        if (cap_gap[i] > 1e-2 || slack[i] > 1e-3 || over_budget[i] > 1e-3) rep.pass = false;
    }
    rep.cases = static_cast<int>(instances.size());
    rep.detail = "max |capacity - oracle| = " + std::to_string(rep.max_gap) + " bits";
    return rep;
}

// Pareto dominance of the all-P_pk profile on desk instances: no grid
// profile achieves more capacity at equal-or-lower empirical outage.
inline VerifyReport verify_p5_pareto(int n_instances, std::uint64_t seed, int threads = 0) {
    std::mt19937_64 rng(seed);
    struct Instance {
        std::vector<ChannelState> blocks;
        SystemParams sp;
    };
    std::vector<Instance> instances(static_cast<std::size_t>(n_instances));
    for (auto& inst : instances) {
        inst.blocks.resize(10);
        for (auto& ch : inst.blocks)
            ch = ChannelState{detail::exp_draw(rng), detail::exp_draw(rng), detail::exp_draw(rng),
                              detail::exp_draw(rng), detail::exp_draw(rng)};
        inst.sp.gamma = 1.0;
        inst.sp.eps_st = 0.1;
        inst.sp.p_pk = detail::uniform_draw(rng, 3.0, 15.0);
    }
    std::vector<char> beaten(instances.size() * 11, 0);
    parallel_for(instances.size(), threads, [&](std::size_t i) {
        for (int j = 0; j <= 10; ++j) {
            const double alpha_bar = j < 10 ? 0.1 * j : 0.99;
            beaten[i * 11 + static_cast<std::size_t>(j)] =
                oracle::oracle_p5_profile_beats_peak(instances[i].blocks, instances[i].sp,
                                                     alpha_bar)
                    ? 1
                    : 0;
        }
    });
    VerifyReport rep;
    rep.cases = static_cast<int>(instances.size()) * 11;
    int violations = 0;
    for (const char b : beaten) violations += b;
    rep.max_gap = violations;
    rep.pass = violations == 0;
    rep.detail = std::to_string(violations) + " dominated cases of " + std::to_string(rep.cases);
    return rep;
}

// Per-block p6b decisions against the 1e4-point grid argmax of
// F(p) - lambda chi(p) on [p'', 100 P_av], within one grid cell.
inline VerifyReport verify_p6b_vs_grid(int n_cases, std::uint64_t seed, int threads = 0,
                                       int grid_points = 10000) {
    std::mt19937_64 rng(seed);
    SystemParams base;
    base.gamma = 1.0;
    base.eps_st = 0.1;
    base.p_av = 10.0;
    struct Case {
        ChannelState ch;
        double alpha_bar, lambda, mu;
    };
    std::vector<Case> cases;
    while (static_cast<int>(cases.size()) < n_cases) {
        Case c;
        c.ch = ChannelState{detail::exp_draw(rng), detail::exp_draw(rng), detail::exp_draw(rng),
                            detail::exp_draw(rng), detail::exp_draw(rng)};
        c.alpha_bar = detail::uniform_draw(rng, 0.05, 0.9);
        c.lambda = detail::uniform_draw(rng, 0.0, 5.0);
        c.mu = detail::uniform_draw(rng, 0.01, 2.0);
        if (!(c.ch.f > 0.0)) continue;
        const double floor = base.eps_st / (base.eta_st * (1.0 - c.alpha_bar) * c.ch.f);
        if (floor > 50.0 * base.p_av) continue;  // keep the grid meaningful
        cases.push_back(c);
    }
    const double p_cap = 100.0 * base.p_av;
    std::vector<double> dist(cases.size(), 0.0);
    std::vector<char> ok(cases.size(), 1);
    parallel_for(cases.size(), threads, [&](std::size_t i) {
        const auto& c = cases[i];
        const double floor = base.eps_st / (base.eta_st * (1.0 - c.alpha_bar) * c.ch.f);
        const double p_star = p6b_block(c.ch, base, c.alpha_bar, c.lambda, c.mu, p_cap);
        const double slope = c.ch.g1 * c.alpha_bar * c.ch.f / base.sigma_sr_sq;
        const auto objective = [&](double p) {
            return std::log2(1.0 + slope * p) - c.mu * p -
                   c.lambda * chi(c.ch, p, c.alpha_bar, base);
        };
        double best_val = -std::numeric_limits<double>::infinity();
        double best_p = floor;
        for (int j = 0; j < grid_points; ++j) {
            const double p = floor + (p_cap - floor) * j / (grid_points - 1);
            const double val = objective(p);
            if (val > best_val) {
                best_val = val;
                best_p = p;
            }
        }
        const double cell = (p_cap - floor) / (grid_points - 1);
        dist[i] = std::abs(p_star - best_p) / cell;
        // The grid maximum is a certified lower bound on the optimum.
        // p6b passes when it lands within one cell of the grid argmax, or
        // when its own value dominates that bound (the grid cannot resolve
        // the escape kink when the escape advantage is below mu * cell).
        const bool feasible = p_star >= floor - 1e-12;
        const bool near = dist[i] <= 1.0 + 1e-9;
        const bool dominates = objective(p_star) >= best_val - 1e-12;
        ok[i] = (feasible && (near || dominates)) ? 1 : 0;
    });
    VerifyReport rep;
    rep.cases = static_cast<int>(cases.size());
    int misplaced = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        rep.max_gap = std::max(rep.max_gap, dist[i]);
        if (!ok[i]) rep.pass = false;
        if (dist[i] > 1.0) ++misplaced;
    }
    rep.tolerance = 1.0;
    rep.detail = "max |p* - grid argmax| = " + std::to_string(rep.max_gap) + " cells; " +
                 std::to_string(misplaced) + " kink case(s) resolved by value dominance";
    return rep;
}

}  // namespace rop

#endif  // ROP_VERIFICATION_HPP
