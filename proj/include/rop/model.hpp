// Domain types and instantaneous link formulas for the ROP (riding on the
// primary) spectrum sharing model: SINR at the primary receiver, SNR at the
// secondary receiver, per-block rates, and the tag's harvested-energy check.
#ifndef ROP_MODEL_HPP
#define ROP_MODEL_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace rop {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-block channel power gains. All dimensionless, >= 0.
struct ChannelState {
    double h1 = 0.0;  // PT -> PR
    double g1 = 0.0;  // ST -> SR
    double f = 0.0;   // PT -> ST
    double h2 = 0.0;  // PT -> SR (sampled for fidelity; SIC removes it from every formula)
    double g2 = 0.0;  // ST -> PR

    void validate() const {
        auto check = [](double v, const char* name) {
            if (!(std::isfinite(v) && v >= 0.0))
                throw ValidationError(std::string("channel gain ") + name + " must be finite and >= 0");
        };
        check(h1, "h1");
        check(g1, "g1");
        check(f, "f");
        check(h2, "h2");
        check(g2, "g2");
    }
};

// System-level constants: noise powers, energy model, QoS targets, budgets.
// Rates are in bits (log base 2) throughout; gamma is in bits.
struct SystemParams {
    double sigma_pr_sq = 1.0;  // PR noise power, > 0
    double sigma_sr_sq = 1.0;  // SR noise power, > 0
    double eta_st = 1.0;       // harvesting efficiency, in (0, 1]
    double eps_st = 0.1;       // ideal-model circuit power, >= 0
    double eps_b = 0.1;        // practical-model static circuit power, >= 0
    double u = 1.0;            // rate-to-energy conversion constant, >= 0
    double gamma = 1.0;        // primary minimum rate (bits), >= 0
    double p_pk = 10.0;        // peak transmit power, > 0
    double p_av = 10.0;        // average transmit power budget, > 0
    double eps_out = 0.5;      // outage budget, in [0, 1]

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(std::isfinite(v) && v > 0.0))
                throw ValidationError(std::string(name) + " must be finite and > 0");
        };
        auto nonneg = [](double v, const char* name) {
            if (!(std::isfinite(v) && v >= 0.0))
                throw ValidationError(std::string(name) + " must be finite and >= 0");
        };
        positive(sigma_pr_sq, "sigma_pr_sq");
        positive(sigma_sr_sq, "sigma_sr_sq");
        if (!(std::isfinite(eta_st) && eta_st > 0.0 && eta_st <= 1.0))
            throw ValidationError("eta_st must be in (0, 1]");
        nonneg(eps_st, "eps_st");
        nonneg(eps_b, "eps_b");
        nonneg(u, "u");
        nonneg(gamma, "gamma");
        positive(p_pk, "p_pk");
        positive(p_av, "p_av");
        if (!(std::isfinite(eps_out) && eps_out >= 0.0 && eps_out <= 1.0))
            throw ValidationError("eps_out must be in [0, 1]");
    }
};

// Per-block allocation. When the ST circuit cannot be powered the block is
// marked inactive: it contributes zero secondary rate and interferes with the
// primary as if alpha were zero.
struct BlockDecision {
    double p = 0.0;
    double alpha = 0.0;
    bool secondary_active = false;
};

enum class EnergyModel { Ideal, Practical };

// Instantaneous SINR at the PR: h1 p / (g2 a f p + sigma_PR^2), with the
// effective reflection a = alpha on active blocks and 0 otherwise.
inline double sinr_pr(const ChannelState& ch, const BlockDecision& d, const SystemParams& sp) {
    const double alpha_eff = d.secondary_active ? d.alpha : 0.0;
    return ch.h1 * d.p / (ch.g2 * alpha_eff * ch.f * d.p + sp.sigma_pr_sq);
}

// Instantaneous SNR at the SR: g1 alpha f p / sigma_SR^2; zero on inactive blocks.
inline double snr_sr(const ChannelState& ch, const BlockDecision& d, const SystemParams& sp) {
    if (!d.secondary_active) return 0.0;
    return ch.g1 * d.alpha * ch.f * d.p / sp.sigma_sr_sq;
}

inline double secondary_rate(const ChannelState& ch, const BlockDecision& d, const SystemParams& sp) {
    return std::log2(1.0 + snr_sr(ch, d, sp));
}

inline double primary_rate(const ChannelState& ch, const BlockDecision& d, const SystemParams& sp) {
    return std::log2(1.0 + sinr_pr(ch, d, sp));
}

// Circuit sustainability. Ideal: harvested power covers eps_ST. Practical:
// it covers the static draw plus the rate-proportional dynamic draw.
inline bool harvest_satisfied(const ChannelState& ch, const BlockDecision& d, const SystemParams& sp,
                              EnergyModel em) {
    const double harvested = sp.eta_st * (1.0 - d.alpha) * ch.f * d.p;
    if (em == EnergyModel::Ideal) return harvested >= sp.eps_st;
    const double dynamic = sp.u * std::log2(1.0 + ch.g1 * d.alpha * ch.f * d.p / sp.sigma_sr_sq);
    return harvested >= sp.eps_b + dynamic;
}

}  // namespace rop

#endif  // ROP_MODEL_HPP
