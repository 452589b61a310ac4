// Brute-force reference optimizers used by tests, the acceptance suite, and
// `rop verify`. These deliberately share no code with the solvers: every
// optimum comes from grid enumeration against the raw constraint formulas.
#ifndef ROP_ORACLE_HPP
#define ROP_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "rop/model.hpp"
#include "rop/solvers_average.hpp"  // FloorSpec
#include "rop/solvers_outage.hpp"   // chi

namespace rop::oracle {

struct GridSpec {
    int p_points = 2001;
    int alpha_points = 1001;
    double p_max = 0.0;  // upper end of the power grid (P_pk for P1/P2)
};

struct PerBlockOpt {
    double p = 0.0;
    double alpha = 0.0;
    double rate = 0.0;
    bool active = false;
};

// Exhaustive (p, alpha) scan for the per-block peak-power problem.
// Feasibility is checked from the constraint definitions; the maximizer is
// tracked through alpha*p (the rate is monotone in it), with ties broken
// toward the lexicographically smallest (p, alpha).
inline PerBlockOpt oracle_per_block(const ChannelState& ch, const SystemParams& sp, EnergyModel em,
                                    const GridSpec& grid) {
    const double snr_gap = sp.gamma > 0.0 ? std::exp2(sp.gamma) - 1.0 : 0.0;
    const int np = std::max(2, grid.p_points);
    const int na = std::max(2, grid.alpha_points);
    PerBlockOpt best;
    double best_ap = -1.0;
    for (int ip = 0; ip < np; ++ip) {
        const double p = grid.p_max * static_cast<double>(ip) / (np - 1);
        const double h1p = ch.h1 * p;
        const double interf_slope = snr_gap * ch.g2 * ch.f * p;
        const double rate_rhs0 = snr_gap * sp.sigma_pr_sq;
        const double harvest_full = sp.eta_st * ch.f * p;
        const double snr_slope = ch.g1 * ch.f * p / sp.sigma_sr_sq;
        for (int ia = 0; ia < na; ++ia) {
            const double alpha = static_cast<double>(ia) / (na - 1);
            if (sp.gamma > 0.0 && h1p < interf_slope * alpha + rate_rhs0) continue;
            const double harvested = harvest_full * (1.0 - alpha);
            if (em == EnergyModel::Ideal) {
                if (harvested < sp.eps_st) continue;
            } else {
                if (harvested < sp.eps_b + sp.u * std::log2(1.0 + snr_slope * alpha)) continue;
            }
            const double ap = alpha * p;
            if (ap > best_ap) {
                best_ap = ap;
                best.p = p;
                best.alpha = alpha;
                best.active = true;
            }
        }
    }
    if (best.active)
        best.rate = std::log2(1.0 + ch.g1 * best.alpha * ch.f * best.p / sp.sigma_sr_sq);
    return best;
}

struct AverageOpt {
    std::vector<double> powers;
    double capacity = 0.0;
    bool found = false;
};

// Exhaustive search over per-block power grids {0} U [floor, p_max] subject
// to mean power <= p_av, refined by zooming the grid around the incumbent.
// Tractable for <= 5 equiprobable blocks.
inline AverageOpt oracle_average(std::span<const ChannelState> blocks, const SystemParams& sp,
                                 double alpha_bar, std::span<const FloorSpec> floors,
                                 double p_max, int points_per_block = 49, int zoom_rounds = 5) {
    const std::size_t nb = blocks.size();
    AverageOpt out;
    out.powers.assign(nb, 0.0);
    if (nb == 0 || nb > 5) return out;
    std::vector<double> snr_slope(nb);
    for (std::size_t i = 0; i < nb; ++i)
        snr_slope[i] = blocks[i].g1 * alpha_bar * blocks[i].f / sp.sigma_sr_sq;

    std::vector<double> lo(nb), hi(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        lo[i] = floors[i] ? *floors[i] : 0.0;
        hi[i] = p_max;
    }
    const double budget = sp.p_av * static_cast<double>(nb) * (1.0 + 1e-12);
    const int k = std::max(2, points_per_block - 1);

    std::vector<std::vector<double>> cand(nb), cand_rate(nb);
    std::vector<double> best(nb, 0.0);
    double best_cap = -1.0;
    for (int round = 0; round < zoom_rounds; ++round) {
        for (std::size_t i = 0; i < nb; ++i) {
            cand[i].clear();
            cand[i].push_back(0.0);
            if (floors[i] && lo[i] <= p_max) {
                const double span = std::max(0.0, std::min(hi[i], p_max) - lo[i]);
                for (int j = 0; j < k; ++j)
                    cand[i].push_back(lo[i] + span * static_cast<double>(j) / (k - 1));
            }
            cand_rate[i].resize(cand[i].size());
            for (std::size_t j = 0; j < cand[i].size(); ++j)
                cand_rate[i][j] = std::log2(1.0 + snr_slope[i] * cand[i][j]);
        }
        std::vector<std::size_t> idx(nb, 0);
        double round_best = -1.0;
        std::vector<double> round_powers(nb, 0.0);
        // Depth-first enumeration with an ascending-power budget prune.
        std::function<void(std::size_t, double, double)> rec = [&](std::size_t d, double psum,
                                                                   double rsum) {
            if (d == nb) {
                if (rsum > round_best) {
                    round_best = rsum;
                    for (std::size_t i = 0; i < nb; ++i) round_powers[i] = cand[i][idx[i]];
                }
                return;
            }
            for (std::size_t j = 0; j < cand[d].size(); ++j) {
                const double ps = psum + cand[d][j];
                if (ps > budget) break;  // candidates ascend
                idx[d] = j;
                rec(d + 1, ps, rsum + cand_rate[d][j]);
            }
        };
        rec(0, 0.0, 0.0);
        if (round_best < 0.0) break;  // even all-zero exceeded the budget: impossible
        if (round_best > best_cap) {
            best_cap = round_best;
            best = round_powers;
        }
        // Shrink each block's continuous range around the incumbent.
        for (std::size_t i = 0; i < nb; ++i) {
            if (!floors[i]) continue;
            const double cell = (std::min(hi[i], p_max) - lo[i]) / (k - 1);
            if (best[i] > 0.0) {
                lo[i] = std::max(*floors[i], best[i] - cell);
                hi[i] = std::min(p_max, best[i] + cell);
            } else {
                hi[i] = std::min(p_max, lo[i] + 2.0 * cell);
                lo[i] = *floors[i];
            }
        }
    }
    if (best_cap >= 0.0) {
        out.found = true;
        out.powers = best;
        out.capacity = best_cap / static_cast<double>(nb);
    }
    return out;
}

struct OutageDualOpt {
    double capacity = 0.0;
    double lambda = 0.0;
    double mu = 0.0;
    bool found = false;
};

// 2-D dual grid oracle for P6a: at each (lambda, mu) every block is solved by
// a fine 1-D power grid maximizing F(p) - lambda chi(p) over [p'', p_max];
// the best primal-feasible profile over the grid is returned.
inline OutageDualOpt oracle_outage_dual(std::span<const ChannelState> blocks,
                                        const SystemParams& sp, double alpha_bar,
                                        std::span<const double> lambda_grid,
                                        std::span<const double> mu_grid, double p_max,
                                        int p_points = 4001) {
    const std::size_t nb = blocks.size();
    OutageDualOpt out;
    if (nb == 0 || nb > 3) return out;
    const double nn = static_cast<double>(nb);
    std::vector<double> snr_slope(nb), floor(nb);
    std::vector<char> powerable(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        snr_slope[i] = blocks[i].g1 * alpha_bar * blocks[i].f / sp.sigma_sr_sq;
        floor[i] = sp.eps_st == 0.0
                       ? 0.0
                       : sp.eps_st / (sp.eta_st * (1.0 - alpha_bar) * blocks[i].f);
        powerable[i] = std::isfinite(floor[i]) ? 1 : 0;
    }
    std::vector<double> p_i(nb);
    for (const double lambda : lambda_grid) {
        for (const double mu : mu_grid) {
            double chi_sum = 0.0, p_sum = 0.0, cap_sum = 0.0;
            for (std::size_t i = 0; i < nb; ++i) {
                if (!powerable[i]) {
                    p_i[i] = 0.0;
                    chi_sum += chi(blocks[i], 0.0, 0.0, sp);
                    continue;
                }
                double best_val = -std::numeric_limits<double>::infinity();
                double best_p = floor[i];
                const int np = std::max(2, p_points);
                for (int j = 0; j < np; ++j) {
                    const double p = floor[i] + (p_max - floor[i]) * j / (np - 1);
                    const double val = std::log2(1.0 + snr_slope[i] * p) - mu * p -
                                       lambda * chi(blocks[i], p, alpha_bar, sp);
                    if (val > best_val) {
                        best_val = val;
                        best_p = p;
                    }
                }
                p_i[i] = best_p;
                p_sum += best_p;
                chi_sum += chi(blocks[i], best_p, alpha_bar, sp);
                cap_sum += std::log2(1.0 + snr_slope[i] * best_p);
            }
            const bool feasible =
                chi_sum / nn <= sp.eps_out + 1e-12 && p_sum / nn <= sp.p_av * (1.0 + 1e-9);
            if (feasible && (!out.found || cap_sum / nn > out.capacity)) {
                out.found = true;
                out.capacity = cap_sum / nn;
                out.lambda = lambda;
                out.mu = mu;
            }
        }
    }
    return out;
}

// Peak-profile Pareto check: enumerates per-block power grids over [p'', P_pk]
// (inactive blocks pinned at P_pk) and reports whether any profile beats the
// all-P_pk profile in (capacity, outage) Pareto terms.
inline bool oracle_p5_profile_beats_peak(std::span<const ChannelState> blocks,
                                         const SystemParams& sp, double alpha_bar,
                                         int points_per_block = 4) {
    const std::size_t nb = blocks.size();
    std::vector<std::vector<double>> rate(nb), out_chi(nb);
    std::vector<std::vector<double>> powers(nb);
    double cap0 = 0.0, out0 = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
        const ChannelState& ch = blocks[i];
        const double floor =
            sp.eps_st == 0.0 ? 0.0 : sp.eps_st / (sp.eta_st * (1.0 - alpha_bar) * ch.f);
        const bool active = floor <= sp.p_pk;
        if (!active) {
            powers[i] = {sp.p_pk};
        } else {
            powers[i].clear();
            for (int j = 0; j < points_per_block; ++j)
                powers[i].push_back(floor + (sp.p_pk - floor) * j / (points_per_block - 1));
        }
        rate[i].resize(powers[i].size());
        out_chi[i].resize(powers[i].size());
        for (std::size_t j = 0; j < powers[i].size(); ++j) {
            const double a_eff = active ? alpha_bar : 0.0;
            rate[i][j] =
                active ? std::log2(1.0 + ch.g1 * alpha_bar * ch.f * powers[i][j] / sp.sigma_sr_sq)
                       : 0.0;
            out_chi[i][j] = chi(ch, powers[i][j], a_eff, sp);
        }
        cap0 += rate[i].back();
        out0 += out_chi[i].back();
    }
    bool beaten = false;
    std::function<void(std::size_t, double, double)> rec = [&](std::size_t d, double cap,
                                                               double outage) {
        if (beaten) return;
        if (d == nb) {
            if ((cap > cap0 + 1e-12 && outage <= out0 + 1e-12) ||
                (cap >= cap0 - 1e-12 && outage < out0 - 1e-12))
                beaten = true;
            return;
        }
        for (std::size_t j = 0; j < powers[d].size(); ++j)
            rec(d + 1, cap + rate[d][j], outage + out_chi[d][j]);
    };
    rec(0, 0.0, 0.0);
    return beaten;
}

}  // namespace rop::oracle

#endif  // ROP_ORACLE_HPP
