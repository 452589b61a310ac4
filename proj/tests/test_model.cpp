#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rop/model.hpp"

using namespace rop;
using Catch::Approx;

namespace {

double exp_draw(std::mt19937_64& rng) {
    return -std::log1p(-static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

SystemParams unit_params() {
    SystemParams sp;
    sp.sigma_pr_sq = 1.0;
    sp.sigma_sr_sq = 1.0;
    sp.eta_st = 1.0;
    sp.eps_st = 0.0;
    sp.eps_b = 0.0;
    return sp;
}

}  // namespace

TEST_CASE("sinr_pr matches the closed form") {
    SystemParams sp = unit_params();
    ChannelState ch{1.0, 0.0, 1.0, 0.0, 1.0};

    REQUIRE(sinr_pr(ch, BlockDecision{0.0, 0.5, true}, sp) == 0.0);

    ch = ChannelState{1.0, 0.0, 1.0, 0.0, 0.0};  // no interference path
    REQUIRE(sinr_pr(ch, BlockDecision{5.0, 1.0, true}, sp) == Approx(5.0));

    ch = ChannelState{2.0, 0.0, 1.0, 0.0, 1.0};
    REQUIRE(sinr_pr(ch, BlockDecision{4.0, 0.5, true}, sp) == Approx(8.0 / 3.0));

    // inactive block: alpha acts as zero on the interference term
    REQUIRE(sinr_pr(ch, BlockDecision{4.0, 0.5, false}, sp) == Approx(8.0));
}

TEST_CASE("snr_sr matches the closed form") {
    SystemParams sp = unit_params();
    ChannelState ch{0.0, 1.0, 1.0, 0.0, 0.0};

    REQUIRE(snr_sr(ch, BlockDecision{0.0, 1.0, true}, sp) == 0.0);
    REQUIRE(snr_sr(ch, BlockDecision{3.0, 1.0, true}, sp) == Approx(3.0));
    REQUIRE(snr_sr(ch, BlockDecision{3.0, 1.0, false}, sp) == 0.0);
}

TEST_CASE("rates are log2(1 + snr)") {
    SystemParams sp = unit_params();
    ChannelState ch{0.0, 1.0, 1.0, 0.0, 0.0};
    REQUIRE(secondary_rate(ch, BlockDecision{0.0, 1.0, true}, sp) == 0.0);
    REQUIRE(secondary_rate(ch, BlockDecision{1.0, 1.0, true}, sp) == Approx(1.0));
    REQUIRE(secondary_rate(ch, BlockDecision{3.0, 1.0, true}, sp) == Approx(2.0));

    ch = ChannelState{2.0, 0.0, 1.0, 0.0, 1.0};
    REQUIRE(primary_rate(ch, BlockDecision{0.0, 0.0, false}, sp) == 0.0);
    REQUIRE(primary_rate(ch, BlockDecision{4.0, 0.5, true}, sp) ==
            Approx(std::log2(11.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("harvest_satisfied, ideal and practical") {
    SystemParams sp = unit_params();
    ChannelState ch{0.0, 1.0, 1.0, 0.0, 0.0};

    sp.eps_st = 0.0;
    REQUIRE(harvest_satisfied(ch, BlockDecision{1.0, 1.0, true}, sp, EnergyModel::Ideal));

    sp.eps_st = 0.6;
    REQUIRE_FALSE(harvest_satisfied(ch, BlockDecision{1.0, 0.5, true}, sp, EnergyModel::Ideal));

    sp.eps_b = 0.5;
    sp.u = 1.0;
    REQUIRE(harvest_satisfied(ch, BlockDecision{1.0, 0.0, true}, sp, EnergyModel::Practical));
}

TEST_CASE("monotonicity of the instantaneous formulas (sampled)") {
    std::mt19937_64 rng(12345);
    SystemParams sp = unit_params();
    sp.eps_st = 0.2;
    for (int k = 0; k < 200; ++k) {
        ChannelState ch{exp_draw(rng), exp_draw(rng), exp_draw(rng), exp_draw(rng), exp_draw(rng)};
        const double p = exp_draw(rng) * 5.0;
        const double alpha = 0.5 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double dp = 1e-3;
        const double da = 1e-3;
        BlockDecision d{p, alpha, true};
        // sinr nonincreasing in alpha, nondecreasing in p
        REQUIRE(sinr_pr(ch, BlockDecision{p, alpha + da, true}, sp) <= sinr_pr(ch, d, sp) + 1e-15);
        if (ch.h1 > 0.0)
            REQUIRE(sinr_pr(ch, BlockDecision{p + dp, alpha, true}, sp) >= sinr_pr(ch, d, sp) - 1e-15);
        // snr nondecreasing in each factor
        REQUIRE(snr_sr(ch, BlockDecision{p + dp, alpha, true}, sp) >= snr_sr(ch, d, sp));
        REQUIRE(snr_sr(ch, BlockDecision{p, alpha + da, true}, sp) >= snr_sr(ch, d, sp));
        // harvest monotone: false at alpha implies false above, true at p implies true above
        if (!harvest_satisfied(ch, d, sp, EnergyModel::Ideal))
            REQUIRE_FALSE(
                harvest_satisfied(ch, BlockDecision{p, alpha + da, true}, sp, EnergyModel::Ideal));
        if (harvest_satisfied(ch, d, sp, EnergyModel::Ideal))
            REQUIRE(
                harvest_satisfied(ch, BlockDecision{p + dp, alpha, true}, sp, EnergyModel::Ideal));
    }
}

TEST_CASE("parameter validation names the offending field") {
    SystemParams sp;
    sp.gamma = -1.0;
    REQUIRE_THROWS_WITH(sp.validate(), Catch::Matchers::ContainsSubstring("gamma"));
    sp = SystemParams{};
    sp.eps_out = 1.5;
    REQUIRE_THROWS_WITH(sp.validate(), Catch::Matchers::ContainsSubstring("eps_out"));
    ChannelState ch{-1.0, 0.0, 0.0, 0.0, 0.0};
    REQUIRE_THROWS_AS(ch.validate(), ValidationError);
}
