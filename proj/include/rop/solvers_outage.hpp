// P5/P6: the hard primary-rate constraint is replaced by a bound eps on the
// empirical primary outage probability, with a fixed reflection coefficient
// and the ideal energy model. P5 (peak power): every block transmits at P_pk.
// P6 (average power): per-block allocation picks between the waterfill point
// p~, the outage-escape power p', and the circuit floor p'';
// the power multiplier mu comes from budget bisection and the outage
// multiplier lambda from bisection along that path, warm-started and
// cross-checked by a projected subgradient on (lambda, mu).
#ifndef ROP_SOLVERS_OUTAGE_HPP
#define ROP_SOLVERS_OUTAGE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "rop/model.hpp"
#include "rop/numerics.hpp"
#include "rop/solvers_average.hpp"

namespace rop {

// Outage indicator for a block at transmit power p and reflection alpha_bar:
// 1 iff the primary rate is at or below gamma. When the rate constraint is
// unsatisfiable at this alpha (h1 - (2^g - 1) g2 a f <= 0) the block is in
// outage at every power; otherwise chi is a step function with critical
// point p' (outage at p = p' exactly, per the "p <= p'" convention).
inline int chi(const ChannelState& ch, double p, double alpha_bar, const SystemParams& sp) {
    if (sp.gamma <= 0.0) return p <= 0.0 || ch.h1 <= 0.0 ? 1 : 0;
    const double snr_gap = std::exp2(sp.gamma) - 1.0;
    const double denom = ch.h1 - snr_gap * ch.g2 * alpha_bar * ch.f;
    if (denom <= 0.0) return 1;
    return p <= sp.sigma_pr_sq * snr_gap / denom ? 1 : 0;
}

// Candidate points of the per-block P6 subproblem at multiplier mu;
// p_prime is +inf when the
// rate constraint is unsatisfiable at this alpha, p_tilde is +inf at mu = 0.
struct OutageCandidates {
    double p_tilde = 0.0;
    double p_prime = 0.0;
    double p_dprime = 0.0;
};

inline OutageCandidates outage_candidates(const ChannelState& ch, const SystemParams& sp,
                                          double alpha_bar, double mu) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    OutageCandidates c;
    const double a = ch.g1 * alpha_bar * ch.f;
    c.p_tilde = a > 0.0 ? (mu > 0.0 ? 1.0 / (mu * std::numbers::ln2) - sp.sigma_sr_sq / a : inf)
                        : 0.0;
    if (sp.gamma <= 0.0) {
        c.p_prime = 0.0;
    } else {
        const double snr_gap = std::exp2(sp.gamma) - 1.0;
        const double denom = ch.h1 - snr_gap * ch.g2 * alpha_bar * ch.f;
        c.p_prime = denom > 0.0 ? sp.sigma_pr_sq * snr_gap / denom : inf;
    }
    c.p_dprime = sp.eps_st == 0.0 ? 0.0 : sp.eps_st / (sp.eta_st * (1.0 - alpha_bar) * ch.f);
    return c;
}

namespace detail {

// Relative margin added to the escape power p' so the primary rate strictly
// exceeds gamma there (chi treats p = p' as outage).
constexpr double kEscapeMargin = 1e-9;

// Per-block constants for the P6b subproblem, with the logs precomputed so
// the budget/outage bisection loops stay log-free.
struct P6BlockContext {
    double c = 0.0;         // g1 a f / sigma_SR^2
    double p_prime = 0.0;   // outage critical point (+inf when chi == 1 for all p)
    double p_dprime = 0.0;  // circuit floor
    double escape_p = 0.0;  // p' with the escape margin applied
    double log2_c = 0.0;
    double l_escape = 0.0;  // log2(1 + c * escape_p)
    double l_dprime = 0.0;  // log2(1 + c * p'')
    bool chi_always = false;
    bool unpowerable = false;  // f = 0 with eps_ST > 0: excluded, p = 0
};

inline P6BlockContext make_p6_context(const ChannelState& ch, const SystemParams& sp,
                                      double alpha_bar) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    P6BlockContext ctx;
    const auto cand = outage_candidates(ch, sp, alpha_bar, 1.0);
    ctx.p_prime = cand.p_prime;
    ctx.p_dprime = cand.p_dprime;
    ctx.unpowerable = !std::isfinite(ctx.p_dprime);
    ctx.chi_always = !std::isfinite(ctx.p_prime);
    ctx.c = ch.g1 * alpha_bar * ch.f / sp.sigma_sr_sq;
    ctx.log2_c = ctx.c > 0.0 ? std::log2(ctx.c) : -inf;
    if (!ctx.chi_always) {
        ctx.escape_p = ctx.p_prime * (1.0 + kEscapeMargin) + (ctx.p_prime == 0.0 ? 1e-12 : 0.0);
        ctx.l_escape = std::log2(1.0 + ctx.c * ctx.escape_p);
    }
    if (!ctx.unpowerable) ctx.l_dprime = std::log2(1.0 + ctx.c * ctx.p_dprime);
    return ctx;
}

// Per-block decision at (lambda, mu). F(p) = log2(1+c p) - mu p.
// log2_mu_ln2 = log2(mu ln2), shared across blocks for a given mu; only used
// when p~ is interior. The mu -> 0 waterfill candidate is capped at p_cap.
inline double p6b_core(const P6BlockContext& ctx, double lambda, double mu, double p_cap,
                       double log2_mu_ln2) {
    constexpr double ln2 = std::numbers::ln2;
    double p_t = 0.0;
    bool interior = false;
    if (ctx.c > 0.0) {
        if (mu > 0.0) {
            p_t = 1.0 / (mu * ln2) - 1.0 / ctx.c;
            interior = p_t <= p_cap;
            if (!interior) p_t = p_cap;
        } else {
            p_t = p_cap;
        }
    }
    if (ctx.chi_always || ctx.p_prime <= p_t) return std::max(p_t, ctx.p_dprime);
    // p' > p~.
    if (ctx.p_dprime < p_t) {
        const double f_tilde = interior ? ctx.log2_c - log2_mu_ln2 - mu * p_t
                                        : std::log2(1.0 + ctx.c * p_t) - mu * p_t;
        const double f_escape = ctx.l_escape - mu * ctx.escape_p;
        return f_tilde - lambda > f_escape ? p_t : ctx.escape_p;
    }
    if (ctx.p_dprime <= ctx.p_prime) {
        const double f_floor = ctx.l_dprime - mu * ctx.p_dprime;
        const double f_escape = ctx.l_escape - mu * ctx.escape_p;
        return f_floor - lambda > f_escape ? ctx.p_dprime : ctx.escape_p;
    }
    return ctx.p_dprime;  // floor already clears the outage threshold
}

}  // namespace detail

// Optimal power for the P6b subproblem: the best of the waterfill point,
// the outage-escape power, and the circuit floor; ties go to the escape
// power. Pre: mu > 0 unless a cap is supplied, 0 <= alpha_bar < 1.
inline double p6b_block(const ChannelState& ch, const SystemParams& sp, double alpha_bar,
                        double lambda, double mu,
                        double p_cap = std::numeric_limits<double>::infinity()) {
    const auto ctx = detail::make_p6_context(ch, sp, alpha_bar);
    const double log2_mu_ln2 = mu > 0.0 ? std::log2(mu * std::numbers::ln2) : 0.0;
    return detail::p6b_core(ctx, lambda, mu, p_cap, log2_mu_ln2);
}

// Allocation for one fixed alpha_bar under an outage-constraint problem.
struct OutageProfileResult {
    std::vector<BlockDecision> profile;
    DualState dual;
    double outage = 0.0;      // empirical E[chi]
    double capacity = 0.0;    // bits per channel use
    double mean_power = 0.0;
    bool feasible = true;
};

// P5 at fixed alpha: every block transmits at P_pk. Blocks whose circuit floor
// exceeds P_pk are inactive (zero rate, chi evaluated at alpha = 0).
inline OutageProfileResult solve_p5a(std::span<const ChannelState> blocks, const SystemParams& sp,
                                     double alpha_bar) {
    OutageProfileResult out;
    const std::size_t n = blocks.size();
    out.profile.resize(n);
    double cap_sum = 0.0;
    double chi_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const ChannelState& ch = blocks[i];
        const double floor =
            sp.eps_st == 0.0 ? 0.0 : sp.eps_st / (sp.eta_st * (1.0 - alpha_bar) * ch.f);
        const bool active = floor <= sp.p_pk;
        out.profile[i] = BlockDecision{sp.p_pk, active ? alpha_bar : 0.0, active};
        if (active)
            cap_sum += std::log2(1.0 + ch.g1 * alpha_bar * ch.f * sp.p_pk / sp.sigma_sr_sq);
        chi_sum += chi(ch, sp.p_pk, active ? alpha_bar : 0.0, sp);
    }
    out.capacity = n > 0 ? cap_sum / static_cast<double>(n) : 0.0;
    out.outage = n > 0 ? chi_sum / static_cast<double>(n) : 0.0;
    out.mean_power = sp.p_pk;
    out.dual.converged = true;
    return out;
}

struct OutageSolution {
    double alpha = 0.0;
    double capacity = 0.0;
    double outage = 0.0;
    double mean_power = 0.0;
    DualState dual;
    bool feasible = true;
};

// P5: among alpha grid points whose empirical outage is within eps, the
// capacity maximizer (ties toward smaller alpha); infeasible when none fit.
inline OutageSolution solve_p5(std::span<const ChannelState> blocks, const SystemParams& sp,
                               const AlphaSearchConfig& acfg = {}, int threads = 1) {
    const int n = std::max(2, acfg.grid_points);
    std::vector<OutageProfileResult> evals(static_cast<std::size_t>(n));
    std::vector<double> alphas(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        alphas[static_cast<std::size_t>(i)] = acfg.alpha_max * static_cast<double>(i) / (n - 1);
    parallel_for(static_cast<std::size_t>(n), threads,
                 [&](std::size_t i) { evals[i] = solve_p5a(blocks, sp, alphas[i]); });
    OutageSolution out;
    out.feasible = false;
    for (std::size_t i = 0; i < evals.size(); ++i) {
        if (evals[i].outage > sp.eps_out + 1e-12) continue;
        if (!out.feasible || evals[i].capacity > out.capacity) {
            out.feasible = true;
            out.alpha = alphas[i];
            out.capacity = evals[i].capacity;
            out.outage = evals[i].outage;
            out.mean_power = evals[i].mean_power;
            out.dual = evals[i].dual;
        }
    }
    if (!out.feasible) out.capacity = std::numeric_limits<double>::quiet_NaN();
    return out;
}

struct P6Config {
    BisectionConfig bisect{};
    int subgradient_steps = 200;
    double p_cap_factor = 100.0;  // cap on the mu -> 0 waterfill candidate, times P_av
    double lambda_max = 1e12;     // outage-multiplier ceiling before declaring infeasibility
};

namespace detail {

// Budget-bisected profile at a fixed outage multiplier lambda.
struct P6PathPoint {
    double mu = 0.0;
    double mean_power = 0.0;
    double outage = 0.0;
    double capacity = 0.0;
    std::vector<double> power;
    bool budget_converged = false;
    bool cap_hit = false;
    int evals = 0;
};

struct P6Workspace {
    std::vector<P6BlockContext> ctx;
    std::vector<int> chi0;  // chi of excluded (unpowerable) blocks at p = 0
    double p_cap = 0.0;
    std::size_t n = 0;
};

inline P6Workspace make_p6_workspace(std::span<const ChannelState> blocks, const SystemParams& sp,
                                     double alpha_bar, const P6Config& cfg) {
    P6Workspace ws;
    ws.n = blocks.size();
    ws.ctx.reserve(ws.n);
    ws.chi0.resize(ws.n, 0);
    ws.p_cap = cfg.p_cap_factor * sp.p_av;
    for (std::size_t i = 0; i < ws.n; ++i) {
        ws.ctx.push_back(make_p6_context(blocks[i], sp, alpha_bar));
        if (ws.ctx[i].unpowerable) ws.chi0[i] = chi(blocks[i], 0.0, 0.0, sp);
    }
    return ws;
}

inline P6PathPoint p6_budget_solve(const P6Workspace& ws, std::span<const ChannelState> blocks,
                                   const SystemParams& sp, double alpha_bar, double lambda,
                                   const P6Config& cfg) {
    P6PathPoint pt;
    double cached_mu = -1.0;
    double cached_log = 0.0;
    const auto policy = [&](std::size_t i, double mu) {
        if (ws.ctx[i].unpowerable) return 0.0;
        if (mu != cached_mu) {
            cached_log = mu > 0.0 ? std::log2(mu * std::numbers::ln2) : 0.0;
            cached_mu = mu;
        }
        return p6b_core(ws.ctx[i], lambda, mu, ws.p_cap, cached_log);
    };
    const auto res = solve_lambda_average_power(policy, ws.n, sp.p_av, cfg.bisect);
    pt.mu = res.dual.lambda;
    pt.mean_power = res.mean_power;
    pt.budget_converged = res.dual.converged;
    pt.evals = res.dual.iterations;
    pt.power.resize(ws.n);
    double chi_sum = 0.0;
    double cap_sum = 0.0;
    for (std::size_t i = 0; i < ws.n; ++i) {
        const double p = policy(i, pt.mu);
        pt.power[i] = p;
        if (ws.ctx[i].unpowerable) {
            chi_sum += ws.chi0[i];
            continue;
        }
        if (p >= ws.p_cap) pt.cap_hit = true;
        chi_sum += chi(blocks[i], p, alpha_bar, sp);
        cap_sum += std::log2(1.0 + ws.ctx[i].c * p);
    }
    pt.outage = ws.n > 0 ? chi_sum / static_cast<double>(ws.n) : 0.0;
    pt.capacity = ws.n > 0 ? cap_sum / static_cast<double>(ws.n) : 0.0;
    return pt;
}

// Smallest point of the fixed log grid (200 points per decade) at or above x.
// Quantizing the final outage multiplier to a shared grid keeps solutions for
// different eps on one deterministic path, which makes the eps-nesting
// comparisons exact on a shared sample.
inline double quantize_lambda_up(double x) {
    if (x <= 0.0) return 0.0;
    const double k = std::ceil(std::log10(x) * 200.0 - 1e-9);
    return std::pow(10.0, k / 200.0);
}

inline OutageProfileResult p6_delegate_rate_constraint(std::span<const ChannelState> blocks,
                                                       const SystemParams& sp, double alpha_bar,
                                                       const P6Config& cfg) {
    // eps = 0 is the hard rate constraint of P3a: floors max(p'(1+margin), p''),
    // rate-infeasible blocks at p = 0.
    const std::size_t n = blocks.size();
    std::vector<FloorSpec> floors(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto rate = rate_floor(blocks[i], sp, alpha_bar);
        if (!rate) {
            floors[i] = std::nullopt;
            continue;
        }
        const double escape = *rate * (1.0 + kEscapeMargin) + (*rate == 0.0 ? 1e-12 : 0.0);
        const double harvest = sp.eps_st == 0.0
                                   ? 0.0
                                   : sp.eps_st / (sp.eta_st * (1.0 - alpha_bar) * blocks[i].f);
        const double floor = std::max(escape, harvest);
        floors[i] = std::isfinite(floor) ? FloorSpec{floor} : FloorSpec{};
    }
    const auto avg = solve_average_floored(blocks, sp, alpha_bar, floors, cfg.bisect);
    OutageProfileResult out;
    out.profile = avg.profile;
    out.capacity = avg.capacity;
    out.mean_power = avg.mean_power;
    out.feasible = avg.feasible;
    out.dual.mu = avg.dual.lambda;  // power multiplier; the outage constraint is a hard floor here
    out.dual.lambda = 0.0;
    out.dual.iterations = avg.dual.iterations;
    out.dual.converged = avg.dual.converged;
    double chi_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        chi_sum += chi(blocks[i], out.profile[i].p, out.profile[i].alpha, sp);
    out.outage = n > 0 ? chi_sum / static_cast<double>(n) : 0.0;
    if (!out.feasible) out.capacity = std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace detail

// P6 under a fixed alpha_bar: dual decomposition over (lambda, mu).
// eps = 0 delegates to the hard-rate-constraint machinery. Otherwise mu is
// bisected for the budget at each lambda, lambda is bisected to the smallest
// grid value meeting the outage budget (the grid is shared across eps), and
// a projected subgradient over (lambda, mu) warm-starts the bracket and
// provides an independent dual iterate count.
inline OutageProfileResult solve_p6a(std::span<const ChannelState> blocks, const SystemParams& sp,
                                     double alpha_bar, const P6Config& cfg = {}) {
    const std::size_t n = blocks.size();
    OutageProfileResult out;
    if (sp.eps_out <= 0.0) return detail::p6_delegate_rate_constraint(blocks, sp, alpha_bar, cfg);

    const auto ws = detail::make_p6_workspace(blocks, sp, alpha_bar, cfg);
    double floor_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (!ws.ctx[i].unpowerable) floor_sum += ws.ctx[i].p_dprime;
    if (n > 0 && floor_sum / static_cast<double>(n) > sp.p_av) {
        out.feasible = false;
        out.capacity = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const double eps = sp.eps_out;
    const double chi_tol = 1e-12;
    int total_evals = 0;

    auto path_point = [&](double lambda) {
        auto pt = detail::p6_budget_solve(ws, blocks, sp, alpha_bar, lambda, cfg);
        total_evals += pt.evals;
        return pt;
    };

    auto pt0 = path_point(0.0);
    double lambda_final = 0.0;
    detail::P6PathPoint final_pt = std::move(pt0);

    if (final_pt.outage > eps + chi_tol) {
        // Subgradient pass: dual certificate and a warm bracket for lambda.
        double sg_cached_mu_lambda[2] = {-1.0, -1.0};
        double sg_cached_log = 0.0;
        const auto gaps = [&](double lambda, double mu) {
            if (lambda != sg_cached_mu_lambda[0] || mu != sg_cached_mu_lambda[1]) {
                sg_cached_log = mu > 0.0 ? std::log2(mu * std::numbers::ln2) : 0.0;
                sg_cached_mu_lambda[0] = lambda;
                sg_cached_mu_lambda[1] = mu;
            }
            double chi_sum = 0.0;
            double p_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (ws.ctx[i].unpowerable) {
                    chi_sum += ws.chi0[i];
                    continue;
                }
                const double p = detail::p6b_core(ws.ctx[i], lambda, mu, ws.p_cap, sg_cached_log);
                p_sum += p;
                chi_sum += chi(blocks[i], p, alpha_bar, sp);
            }
            const double nn = static_cast<double>(n);
            return std::pair{chi_sum / nn - eps, p_sum / nn - sp.p_av};
        };
        SubgradientTols tols;
        tols.residual_tol = 1e-3 * std::max(1.0, sp.p_av);
        tols.feas_tol_1 = 1.0 / static_cast<double>(std::max<std::size_t>(n, 1));
        tols.feas_tol_2 = 1e-3 * sp.p_av;
        DualState init;
        init.lambda = 1.0;
        init.mu = std::max(final_pt.mu, 1e-6);
        const auto sg = subgradient_2d(gaps, init, cfg.subgradient_steps,
                                       [](int k) { return 1.0 / std::sqrt(double(k)); }, tols);
        total_evals += sg.iterations;

        // Bracket [lo infeasible, hi feasible], warm-started near the
        // subgradient's lambda, then geometric bisection and snap-up.
        double lo = 0.0;
        double hi = std::max(1.0, sg.converged ? sg.lambda * 0.5 : sg.lambda);
        if (hi <= 0.0) hi = 1.0;
        auto pt_hi = path_point(hi);
        while (pt_hi.outage > eps + chi_tol) {
            lo = hi;
            hi *= 2.0;
            if (hi > cfg.lambda_max) {
                out.feasible = false;
                out.capacity = std::numeric_limits<double>::quiet_NaN();
                out.dual = sg;
                return out;
            }
            pt_hi = path_point(hi);
        }
        double lo_pos = std::max(lo, hi * 1e-12);
        while (hi / lo_pos > 1.005) {
            const double mid = std::sqrt(lo_pos * hi);
            auto pt_mid = path_point(mid);
            if (pt_mid.outage > eps + chi_tol) {
                lo_pos = mid;
            } else {
                hi = mid;
                pt_hi = std::move(pt_mid);
            }
        }
        lambda_final = detail::quantize_lambda_up(hi);
        if (lambda_final > hi) {
            auto pt_q = path_point(lambda_final);
            if (pt_q.outage <= eps + chi_tol) {
                final_pt = std::move(pt_q);
            } else {  // monotonicity wiggle: keep the verified feasible end
                lambda_final = hi;
                final_pt = std::move(pt_hi);
            }
        } else {
            lambda_final = hi;
            final_pt = std::move(pt_hi);
        }
    }

    out.profile.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool active = !ws.ctx[i].unpowerable;
        out.profile[i] = BlockDecision{final_pt.power[i], active ? alpha_bar : 0.0, active};
    }
    out.outage = final_pt.outage;
    out.capacity = final_pt.capacity;
    out.mean_power = final_pt.mean_power;
    out.dual.lambda = lambda_final;
    out.dual.mu = final_pt.mu;
    out.dual.iterations = total_evals;
    const double resid_tol = 1e-3 * std::max(1.0, sp.p_av);
    const double r_chi = std::abs(lambda_final * (final_pt.outage - eps));
    const double r_pow = std::abs(final_pt.mu * (final_pt.mean_power - sp.p_av));
    out.dual.converged = final_pt.budget_converged && !final_pt.cap_hit && r_chi <= resid_tol &&
                         r_pow <= resid_tol;
    return out;
}

// P6: alpha grid search over solve_p6a; infeasible when no grid point admits
// the outage budget within the power budget.
inline OutageSolution solve_p6(std::span<const ChannelState> blocks, const SystemParams& sp,
                               const AlphaSearchConfig& acfg = {}, const P6Config& cfg = {},
                               int threads = 1) {
    const int n = std::max(2, acfg.grid_points);
    std::vector<double> alphas(static_cast<std::size_t>(n));
    std::vector<double> caps(static_cast<std::size_t>(n));
    std::vector<char> ok(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
        alphas[static_cast<std::size_t>(i)] = acfg.alpha_max * static_cast<double>(i) / (n - 1);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
        const auto r = solve_p6a(blocks, sp, alphas[i], cfg);
        ok[i] = r.feasible ? 1 : 0;
        caps[i] = r.feasible ? r.capacity : -std::numeric_limits<double>::infinity();
    });
    OutageSolution out;
    out.feasible = false;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < caps.size(); ++i) {
        if (!ok[i]) continue;
        if (!out.feasible || caps[i] > caps[arg]) {
            arg = i;
            out.feasible = true;
        }
    }
    if (!out.feasible) {
        out.capacity = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const auto best = solve_p6a(blocks, sp, alphas[arg], cfg);
    out.alpha = alphas[arg];
    out.capacity = best.capacity;
    out.outage = best.outage;
    out.mean_power = best.mean_power;
    out.dual = best.dual;
    return out;
}

}  // namespace rop

#endif  // ROP_SOLVERS_OUTAGE_HPP
