// P3/P4: fixed reflection coefficient, average transmit power budget,
// primary rate constraint, ideal (P3) or practical (P4) energy model.
// Per-block solution is a floored waterfill; the budget multiplier comes from
// bisection on E[p] = P_av; the outer problem is a 1-D alpha grid search.
#ifndef ROP_SOLVERS_AVERAGE_HPP
#define ROP_SOLVERS_AVERAGE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "rop/model.hpp"
#include "rop/numerics.hpp"

namespace rop {

// Per-block power floor; nullopt marks a block whose constraints cannot be
// met at any power (it is allocated p = 0, secondary off).
using FloorSpec = std::optional<double>;

namespace detail {

// Rate-constraint floor: p >= sigma_PR^2 (2^g - 1) / (h1 - (2^g - 1) g2 a f),
// infeasible when the denominator is <= 0. Vacuous (0) when gamma = 0.
inline std::optional<double> rate_floor(const ChannelState& ch, const SystemParams& sp,
                                        double alpha_bar) {
    if (sp.gamma <= 0.0) return 0.0;
    const double snr_gap = std::exp2(sp.gamma) - 1.0;
    const double denom = ch.h1 - snr_gap * ch.g2 * alpha_bar * ch.f;
    if (denom <= 0.0) return std::nullopt;
    return sp.sigma_pr_sq * snr_gap / denom;
}

// Three-branch allocation shared by waterfill_block and the solver loops:
// off below the marginal-utility threshold, clamped to the floor in the
// middle band, waterfill above. a = g1 * alpha_bar * f.
inline double waterfill_power(double a, double sigma_sr_sq, double lambda, double floor) {
    constexpr double ln2 = std::numbers::ln2;
    if (a <= 0.0) return 0.0;
    const double off_threshold = a / (sigma_sr_sq * ln2);
    if (lambda >= off_threshold) return 0.0;
    const double floor_threshold = a / (ln2 * (sigma_sr_sq + a * floor));
    if (lambda > floor_threshold) return floor;
    return 1.0 / (lambda * ln2) - sigma_sr_sq / a;  // +inf at lambda = 0
}

// Same branches with the off branch removed: used for primal recovery once
// the active set is frozen.
inline double waterfill_power_on(double a, double sigma_sr_sq, double lambda, double floor) {
    constexpr double ln2 = std::numbers::ln2;
    if (a <= 0.0) return floor;
    return std::max(floor, 1.0 / (lambda * ln2) - sigma_sr_sq / a);
}

}  // namespace detail

// Floor P_m for P3a: max{rate floor, eps_ST / (eta (1 - a) f)}.
// Pre: 0 <= alpha_bar < 1.
inline FloorSpec p_m(const ChannelState& ch, const SystemParams& sp, double alpha_bar) {
    const auto rate = detail::rate_floor(ch, sp, alpha_bar);
    if (!rate) return std::nullopt;
    const double harvest =
        sp.eps_st == 0.0 ? 0.0 : sp.eps_st / (sp.eta_st * (1.0 - alpha_bar) * ch.f);
    const double floor = std::max(*rate, harvest);
    if (!std::isfinite(floor)) return std::nullopt;  // f = 0 with eps_ST > 0
    return floor;
}

// Per-block floored-waterfill power at multiplier lambda, floor P_m.
inline double waterfill_block(const ChannelState& ch, const SystemParams& sp, double alpha_bar,
                              double lambda, double floor) {
    return detail::waterfill_power(ch.g1 * alpha_bar * ch.f, sp.sigma_sr_sq, lambda, floor);
}

// Circuit floor P_c for the practical model: positive root of
// eta (1 - a) f p = eps_b + u log2(1 + g1 a f p / sigma_SR^2).
// The LHS grows linearly and the RHS logarithmically, so the bracket is
// found by doubling. Pre: 0 <= alpha_bar < 1, f > 0.
inline double p_c(const ChannelState& ch, const SystemParams& sp, double alpha_bar) {
    const double slope = sp.eta_st * (1.0 - alpha_bar) * ch.f;
    if (!(slope > 0.0)) {
        if (sp.eps_b == 0.0) return 0.0;
        throw NonConvergence("p_c: no harvesting path (eta (1 - a) f = 0)");
    }
    const double c = ch.g1 * alpha_bar * ch.f / sp.sigma_sr_sq;
    const auto gap = [&](double p) {
        return slope * p - (sp.eps_b + sp.u * std::log2(1.0 + c * p));
    };
    double lo = 0.0;
    if (sp.eps_b == 0.0) {
        if (sp.u * c / std::numbers::ln2 <= slope) return 0.0;  // crossing at the origin
        lo = 1e-12;  // gap dips negative just above 0
    }
    double hi = 1.0;
    int doublings = 0;
    while (gap(hi) <= 0.0) {
        if (++doublings > 400) throw NonConvergence("p_c: bracket expansion exceeded limit");
        hi *= 2.0;
    }
    return bisect(gap, lo, hi, BisectionConfig{1e-12 * std::max(1.0, hi), 300});
}

// Allocation for one fixed alpha_bar: profile, dual state, capacity.
struct AverageProfile {
    std::vector<BlockDecision> profile;
    DualState dual;
    double capacity = 0.0;    // bits per channel use, empirical mean
    double mean_power = 0.0;
    bool feasible = true;     // false when the per-block floors exceed the budget
};

namespace detail {

// Shared P3a/P4a machinery for arbitrary floors. Blocks with nullopt floors
// get p = 0 (secondary off). Declared infeasible when serving every feasible
// block at its floor already exceeds the budget. After the lambda bisection,
// if a block's on/off jump leaves the budget strictly slack, lambda is
// re-bisected with the active set frozen so that E[p] = P_av exactly.
// On desk-sized samples (n <= 16) the served set is found exactly by subset
// enumeration: the on/off choice is combinatorial there and the dual jump
// gap is visible at 1/n scale.
inline AverageProfile solve_average_floored(std::span<const ChannelState> blocks,
                                            const SystemParams& sp, double alpha_bar,
                                            std::span<const FloorSpec> floors,
                                            const BisectionConfig& cfg = {}) {
    const std::size_t n = blocks.size();
    AverageProfile out;
    out.profile.resize(n);
    std::vector<double> a(n);
    double floor_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = blocks[i].g1 * alpha_bar * blocks[i].f;
        if (floors[i]) floor_sum += *floors[i];
    }
    if (n > 0 && floor_sum / static_cast<double>(n) > sp.p_av) {
        out.feasible = false;
        out.capacity = -std::numeric_limits<double>::infinity();
        return out;
    }
    const auto policy = [&](std::size_t i, double lambda) {
        return floors[i] ? waterfill_power(a[i], sp.sigma_sr_sq, lambda, *floors[i]) : 0.0;
    };
    auto res = solve_lambda_average_power(policy, n, sp.p_av, cfg);
    std::vector<double> power(n);
    for (std::size_t i = 0; i < n; ++i) power[i] = policy(i, res.dual.lambda);
    double cap_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        cap_sum += std::log2(1.0 + a[i] * power[i] / sp.sigma_sr_sq);

    const auto solve_on_set = [&](const std::vector<char>& on) {
        const auto policy_on = [&](std::size_t i, double lambda) {
            return on[i] ? waterfill_power_on(a[i], sp.sigma_sr_sq, lambda, *floors[i]) : 0.0;
        };
        auto r = solve_lambda_average_power(policy_on, n, sp.p_av, cfg);
        std::vector<double> p(n);
        double cap = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = policy_on(i, r.dual.lambda);
            cap += std::log2(1.0 + a[i] * p[i] / sp.sigma_sr_sq);
        }
        return std::tuple{r, std::move(p), cap};
    };

    if (n > 16) {
        if (res.dual.lambda > 0.0 && res.mean_power < sp.p_av * (1.0 - 1e-6)) {
            // On/off jump straddled the budget: freeze the served set, re-solve.
            std::vector<char> on(n, 0);
            bool any_on = false;
            for (std::size_t i = 0; i < n; ++i)
                if (power[i] > 0.0) on[i] = 1, any_on = true;
            if (any_on) {
                auto [r, p, cap] = solve_on_set(on);
                if (r.dual.converged && cap >= cap_sum) {
                    res = r;
                    power = std::move(p);
                    cap_sum = cap;
                }
            }
        }
    } else if (n > 0) {
        std::vector<std::size_t> base;
        for (std::size_t i = 0; i < n; ++i)
            if (floors[i]) base.push_back(i);
        res = LambdaSolveResult{};  // all-off fallback
        res.dual.converged = true;
        std::fill(power.begin(), power.end(), 0.0);
        cap_sum = 0.0;
        for (std::uint32_t mask = 1; mask < (1u << base.size()); ++mask) {
            std::vector<char> on(n, 0);
            double fsum = 0.0;
            for (std::size_t b = 0; b < base.size(); ++b)
                if (mask & (1u << b)) {
                    on[base[b]] = 1;
                    fsum += *floors[base[b]];
                }
            if (fsum / static_cast<double>(n) > sp.p_av) continue;
            auto [r, p, cap] = solve_on_set(on);
            if (cap > cap_sum) {
                res = r;
                power = std::move(p);
                cap_sum = cap;
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const bool active = power[i] > 0.0;
        out.profile[i] = BlockDecision{power[i], active ? alpha_bar : 0.0, active};
    }
    out.capacity = n > 0 ? cap_sum / static_cast<double>(n) : 0.0;
    out.mean_power = res.mean_power;
    out.dual = res.dual;
    return out;
}

inline std::vector<FloorSpec> floors_p3(std::span<const ChannelState> blocks,
                                        const SystemParams& sp, double alpha_bar) {
    std::vector<FloorSpec> floors(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) floors[i] = p_m(blocks[i], sp, alpha_bar);
    return floors;
}

inline std::vector<FloorSpec> floors_p4(std::span<const ChannelState> blocks,
                                        const SystemParams& sp, double alpha_bar) {
    std::vector<FloorSpec> floors(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const ChannelState& ch = blocks[i];
        const auto rate = rate_floor(ch, sp, alpha_bar);
        if (!rate) {
            floors[i] = std::nullopt;
            continue;
        }
        if (!(ch.f > 0.0)) {
            // No harvesting path: the static draw decides feasibility.
            floors[i] = sp.eps_b > 0.0 ? FloorSpec{} : FloorSpec{*rate};
            continue;
        }
        floors[i] = std::max(*rate, p_c(ch, sp, alpha_bar));
    }
    return floors;
}

}  // namespace detail

// P3 at fixed alpha: waterfill with floor P_m, lambda from E[p*] = P_av.
inline AverageProfile solve_p3a(std::span<const ChannelState> blocks, const SystemParams& sp,
                                double alpha_bar, const BisectionConfig& cfg = {}) {
    const auto floors = detail::floors_p3(blocks, sp, alpha_bar);
    return detail::solve_average_floored(blocks, sp, alpha_bar, floors, cfg);
}

// P4 at fixed alpha: identical machinery with floor P_L = max{rate floor, P_c}.
inline AverageProfile solve_p4a(std::span<const ChannelState> blocks, const SystemParams& sp,
                                double alpha_bar, const BisectionConfig& cfg = {}) {
    const auto floors = detail::floors_p4(blocks, sp, alpha_bar);
    return detail::solve_average_floored(blocks, sp, alpha_bar, floors, cfg);
}

struct AverageSolution {
    double alpha = 0.0;
    double capacity = 0.0;
    AverageProfile inner;
    bool feasible = true;
};

namespace detail {

template <class SolveA>
AverageSolution solve_average_outer(std::span<const ChannelState> blocks, const SystemParams& sp,
                                    SolveA&& solve_a, const AlphaSearchConfig& acfg, int threads) {
    const auto [alpha, value] = alpha_grid_search(
        [&](double ab) { return solve_a(blocks, sp, ab).capacity; }, acfg, threads);
    AverageSolution out;
    if (!std::isfinite(value)) {  // floors exceed the budget at every alpha
        out.feasible = false;
        out.capacity = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.alpha = alpha;
    out.inner = solve_a(blocks, sp, alpha);
    out.capacity = out.inner.capacity;
    return out;
}

}  // namespace detail

inline AverageSolution solve_p3(std::span<const ChannelState> blocks, const SystemParams& sp,
                                const AlphaSearchConfig& acfg = {}, int threads = 1) {
    return detail::solve_average_outer(
        blocks, sp, [](auto b, const SystemParams& s, double ab) { return solve_p3a(b, s, ab); },
        acfg, threads);
}

inline AverageSolution solve_p4(std::span<const ChannelState> blocks, const SystemParams& sp,
                                const AlphaSearchConfig& acfg = {}, int threads = 1) {
    return detail::solve_average_outer(
        blocks, sp, [](auto b, const SystemParams& s, double ab) { return solve_p4a(b, s, ab); },
        acfg, threads);
}

}  // namespace rop

#endif  // ROP_SOLVERS_AVERAGE_HPP
