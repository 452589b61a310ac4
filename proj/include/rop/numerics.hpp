// Root-finding and dual-search toolkit shared by the solvers: scalar
// bisection, lambda bisection for the average-power budget, projected
// 2-D subgradient for (lambda, mu), and the 1-D alpha grid search.
#ifndef ROP_NUMERICS_HPP
#define ROP_NUMERICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rop/threading.hpp"

namespace rop {

struct NoSignChange : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BisectionConfig {
    double abs_tol = 1e-10;
    int max_iter = 200;
};

// Lagrange multipliers and convergence metadata. lambda is the outage (or
// rate-budget) multiplier, mu the power multiplier; solvers that use only one
// leave the other at zero.
struct DualState {
    double lambda = 0.0;
    double mu = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct AlphaSearchConfig {
    int grid_points = 1001;
    double alpha_max = 1.0 - 1e-9;
};

// Bisection on a sign-changing function. Requires fn(lo), fn(hi) of opposite
// sign (or zero at an endpoint); returns the midpoint of the final bracket,
// whose width is at most abs_tol.
template <class F>
double bisect(F&& fn, double lo, double hi, const BisectionConfig& cfg = {}) {
    double flo = fn(lo);
    double fhi = fn(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw NoSignChange("bisect: fn(lo) and fn(hi) have the same sign");
    for (int it = 0; it < cfg.max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= cfg.abs_tol) return mid;
        const double fmid = fn(mid);
        if (fmid == 0.0) return mid;
        if ((fmid > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    if (hi - lo <= cfg.abs_tol) return 0.5 * (lo + hi);
    throw NonConvergence("bisect: max_iter exceeded before bracket reached abs_tol");
}

namespace detail {

// Mean power of a per-block policy at a given multiplier, fixed summation order.
template <class Policy>
double mean_power(Policy&& policy, std::size_t n_blocks, double lambda) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n_blocks; ++i) sum += policy(i, lambda);
    return sum / static_cast<double>(n_blocks);
}

}  // namespace detail

struct LambdaSolveResult {
    DualState dual;
    double mean_power = 0.0;
};

// Finds lambda* >= 0 such that the empirical mean of policy(i, lambda*)
// meets the budget: zero if the lambda->0+ mean is already within budget,
// otherwise the complementary-slackness root E[p] = p_av. policy(i, .) must
// be nonincreasing in lambda for every block. Bracketing doubles lambda from
// 1 and throws NonConvergence if the budget is still exceeded after
// cfg.max_iter doublings. A residual above 1e-3·p_av (a jump in E[p] at
// lambda*) is reported via converged=false rather than by throwing.
template <class Policy>
LambdaSolveResult solve_lambda_average_power(Policy&& policy, std::size_t n_blocks, double p_av,
                                             const BisectionConfig& cfg = {}) {
    LambdaSolveResult out;
    if (n_blocks == 0) {
        out.dual.converged = true;
        return out;
    }
    const double rel_tol = 1e-3 * p_av;
    double mean0 = detail::mean_power(policy, n_blocks, 0.0);
    ++out.dual.iterations;
    if (mean0 <= p_av) {
        out.dual.lambda = 0.0;
        out.dual.converged = true;
        out.mean_power = mean0;
        return out;
    }
    double lo = 0.0;
    double hi = 1.0;
    double mean_hi = detail::mean_power(policy, n_blocks, hi);
    ++out.dual.iterations;
    int doublings = 0;
    while (mean_hi > p_av) {
        if (++doublings > cfg.max_iter)
            throw NonConvergence("solve_lambda_average_power: bracketing failed after max doublings");
        lo = hi;
        hi *= 2.0;
        mean_hi = detail::mean_power(policy, n_blocks, hi);
        ++out.dual.iterations;
    }
    // E[p](lo) > p_av >= E[p](hi); shrink to a machine-tight bracket and keep
    // the feasible (hi) side.
    double mean_result = mean_hi;
    double lambda = hi;
    for (int it = 0; it < cfg.max_iter; ++it) {
        if (hi - lo <= 1e-12 * std::max(1.0, hi)) break;
        const double mid = 0.5 * (lo + hi);
        const double m = detail::mean_power(policy, n_blocks, mid);
        ++out.dual.iterations;
        if (m > p_av) {
            lo = mid;
        } else {
            hi = mid;
            lambda = mid;
            mean_result = m;
            if (std::abs(m - p_av) <= 1e-12 * p_av) break;
        }
    }
    out.dual.lambda = lambda;
    out.mean_power = mean_result;
    out.dual.converged = std::abs(mean_result - p_av) <= rel_tol;
    return out;
}

// Tolerances for subgradient_2d; callers scale residual_tol by max(1, P_av).
struct SubgradientTols {
    double residual_tol = 1e-3;   // bound on |lambda*gap1| and |mu*gap2|
    double feas_tol_1 = 1e-9;     // allowed positive slackness of gap1
    double feas_tol_2 = 1e-3;     // allowed positive slackness of gap2
};

// Projected subgradient over the nonnegative orthant for two dualized
// constraints. gaps(lambda, mu) returns (E[chi]-eps, E[p]-P_av) evaluated at
// the per-block argmax for those multipliers. Keeps the best iterate seen
// (feasible with smallest residual, else smallest violation). converged=false
// after `steps` iterations is reported in the result, not thrown: callers
// decide whether a sloppy dual certificate is fatal.
template <class Gaps, class Schedule>
DualState subgradient_2d(Gaps&& gaps, DualState init, int steps, Schedule&& step_schedule,
                         const SubgradientTols& tols = {}) {
    DualState cur = init;
    DualState best = init;
    double best_score = std::numeric_limits<double>::infinity();
    bool best_feasible = false;
    for (int k = 1; k <= steps; ++k) {
        const auto [gap1, gap2] = gaps(cur.lambda, cur.mu);
        const double r1 = std::abs(cur.lambda * gap1);
        const double r2 = std::abs(cur.mu * gap2);
        const bool feasible = gap1 <= tols.feas_tol_1 && gap2 <= tols.feas_tol_2;
        const double residual = std::max(r1, r2);
        if (feasible) {
            if (!best_feasible || residual < best_score) {
                best = cur;
                best_score = residual;
                best_feasible = true;
            }
        } else if (!best_feasible) {
            const double violation = std::max(gap1, gap2);
            if (violation < best_score) {
                best = cur;
                best_score = violation;
            }
        }
        if (feasible && r1 <= tols.residual_tol && r2 <= tols.residual_tol) {
            cur.iterations = k;
            cur.converged = true;
            return cur;
        }
        const double step = step_schedule(k);
        cur.lambda = std::max(0.0, cur.lambda + step * gap1);
        cur.mu = std::max(0.0, cur.mu + step * gap2);
    }
    best.iterations = steps;
    best.converged = false;
    return best;
}

// Grid search over [0, alpha_max]; ties break toward the smaller alpha.
// evaluate must be pure; grid points are evaluated in data-parallel fashion
// and reduced in index order.
template <class Eval>
std::pair<double, double> alpha_grid_search(Eval&& evaluate, const AlphaSearchConfig& cfg = {},
                                            int threads = 1) {
    const int n = std::max(2, cfg.grid_points);
    std::vector<double> values(static_cast<std::size_t>(n));
    std::vector<double> alphas(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        alphas[static_cast<std::size_t>(i)] = cfg.alpha_max * static_cast<double>(i) / (n - 1);
    parallel_for(static_cast<std::size_t>(n), threads,
                 [&](std::size_t i) { values[i] = evaluate(alphas[i]); });
    std::size_t arg = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[arg]) arg = i;
    return {alphas[arg], values[arg]};
}

}  // namespace rop

#endif  // ROP_NUMERICS_HPP
