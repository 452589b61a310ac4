// Closed-form per-block solvers for the peak-power problems with a
// dynamically adjustable reflection coefficient: P1 (ideal energy model,
// p* = P_pk, alpha* = alpha_L) and P2 (practical energy model,
// p* = P_pk, alpha* = min{alpha_M, alpha_pk}).
#ifndef ROP_SOLVERS_PEAK_HPP
#define ROP_SOLVERS_PEAK_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "rop/model.hpp"
#include "rop/numerics.hpp"

namespace rop {

struct DegenerateChannel : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-block solution of P1/P2. Bound fields are populated (clamped to [0,1])
// by the solver that defines them and left at zero otherwise.
struct PeakSolution {
    BlockDecision decision;
    double alpha_l = 0.0;   // P1 feasibility bound
    double alpha_m = 0.0;   // rate-constraint bound
    double alpha_pk = 0.0;  // practical energy-curve intersection at P_pk
};

namespace detail {

// Largest alpha allowed by the rate constraint at p = P_pk, unclamped.
// +inf when the constraint is vacuous (gamma = 0) or does not involve alpha
// (g2 = 0); the caller then checks rate feasibility directly.
inline double rate_alpha_bound_at_peak(const ChannelState& ch, const SystemParams& sp) {
    if (sp.gamma <= 0.0 || ch.g2 <= 0.0) return std::numeric_limits<double>::infinity();
    const double snr_gap = std::exp2(sp.gamma) - 1.0;
    return ch.h1 / (snr_gap * ch.g2 * ch.f) - sp.sigma_pr_sq / (ch.g2 * ch.f * sp.p_pk);
}

// Primary rate constraint achievable at (p = P_pk, alpha = 0)?
inline bool rate_feasible_at_peak(const ChannelState& ch, const SystemParams& sp) {
    if (sp.gamma <= 0.0) return true;
    return ch.h1 * sp.p_pk >= (std::exp2(sp.gamma) - 1.0) * sp.sigma_pr_sq;
}

// Harvest check with the 1e-9 binding-constraint tolerance: alpha_L sits
// exactly on the harvest boundary whenever that bound is the binding one.
inline bool harvest_ok_at(const ChannelState& ch, const SystemParams& sp, double alpha) {
    const double harvested = sp.eta_st * (1.0 - alpha) * ch.f * sp.p_pk;
    return harvested >= sp.eps_st - 1e-9 * std::max(1.0, sp.eps_st);
}

}  // namespace detail

// Largest alpha that keeps P1 feasible for this block:
// max{0, min{h1/((2^g-1) g2 f) - sigma_PR^2/(g2 f P_pk), 1 - eps_ST/(eta f P_pk), 1}}.
inline double alpha_l(const ChannelState& ch, const SystemParams& sp) {
    if (!(ch.f > 0.0)) throw DegenerateChannel("alpha_l: f must be > 0 (f = 0 blocks are inactive)");
    const double rate_bound = detail::rate_alpha_bound_at_peak(ch, sp);
    const double harvest_bound = 1.0 - sp.eps_st / (sp.eta_st * ch.f * sp.p_pk);
    return std::max(0.0, std::min({rate_bound, harvest_bound, 1.0}));
}

inline PeakSolution solve_p1(const ChannelState& ch, const SystemParams& sp) {
    PeakSolution s;
    s.decision.p = sp.p_pk;
    if (!(ch.f > 0.0) || !(ch.g1 > 0.0)) return s;  // tag unpowerable or link dead
    s.alpha_l = alpha_l(ch, sp);
    s.alpha_m = std::clamp(detail::rate_alpha_bound_at_peak(ch, sp), 0.0, 1.0);
    s.decision.alpha = s.alpha_l;
    s.decision.secondary_active = s.alpha_l > 0.0 && detail::rate_feasible_at_peak(ch, sp) &&
                                  detail::harvest_ok_at(ch, sp, s.alpha_l);
    if (!s.decision.secondary_active) s.decision.alpha = 0.0;
    return s;
}

// Largest alpha satisfying the practical energy constraint at transmit power
// p: the root of eta (1-a) f p = eps_b + u log2(1 + g1 a f p / sigma_SR^2)
// on [0,1] (LHS decreasing, RHS increasing). nullopt when even a = 0 cannot
// power the circuit (eta f p < eps_b).
inline std::optional<double> alpha_intersection(const ChannelState& ch, const SystemParams& sp,
                                                double p) {
    const auto gap = [&](double a) {
        return sp.eta_st * (1.0 - a) * ch.f * p -
               (sp.eps_b + sp.u * std::log2(1.0 + ch.g1 * a * ch.f * p / sp.sigma_sr_sq));
    };
    const double g0 = gap(0.0);
    if (g0 < 0.0) return std::nullopt;
    if (gap(1.0) >= 0.0) return 1.0;  // zero dynamic cost: constraint holds up to a = 1
    if (g0 == 0.0) return 0.0;
    return bisect(gap, 0.0, 1.0, BisectionConfig{1e-12, 200});
}

inline std::optional<double> alpha_pk(const ChannelState& ch, const SystemParams& sp) {
    return alpha_intersection(ch, sp, sp.p_pk);
}

// Rate-constraint bound alpha_M at p = P_pk, unclamped.
// Pre: gamma > 0, g2 > 0, f > 0.
inline double alpha_m(const ChannelState& ch, const SystemParams& sp) {
    const double snr_gap = std::exp2(sp.gamma) - 1.0;
    return ch.h1 / (snr_gap * ch.g2 * ch.f) - sp.sigma_pr_sq / (ch.g2 * ch.f * sp.p_pk);
}

inline PeakSolution solve_p2(const ChannelState& ch, const SystemParams& sp) {
    PeakSolution s;
    s.decision.p = sp.p_pk;
    if (!(ch.f > 0.0) || !(ch.g1 > 0.0)) return s;
    const auto ahat = alpha_intersection(ch, sp, sp.p_pk);
    const double rate_bound = detail::rate_alpha_bound_at_peak(ch, sp);
    s.alpha_m = std::clamp(rate_bound, 0.0, 1.0);
    s.alpha_pk = ahat.value_or(0.0);
    if (!ahat.has_value() || !detail::rate_feasible_at_peak(ch, sp)) return s;
    const double alpha = std::clamp(std::min(rate_bound, *ahat), 0.0, 1.0);
    s.decision.alpha = alpha;
    s.decision.secondary_active = alpha > 0.0;
    if (!s.decision.secondary_active) s.decision.alpha = 0.0;
    return s;
}

}  // namespace rop

#endif  // ROP_SOLVERS_PEAK_HPP
