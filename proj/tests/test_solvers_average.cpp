#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "rop/oracle.hpp"
#include "rop/solvers_average.hpp"
#include "rop/solvers_peak.hpp"
#include "rop/verification.hpp"

using namespace rop;
using Catch::Approx;

namespace {

double exp_draw(std::mt19937_64& rng) {
    return -std::log1p(-static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

std::vector<ChannelState> rayleigh_blocks(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<ChannelState> blocks(static_cast<std::size_t>(n));
    for (auto& ch : blocks)
        ch = ChannelState{exp_draw(rng), exp_draw(rng), exp_draw(rng), exp_draw(rng),
                          exp_draw(rng)};
    return blocks;
}

}  // namespace

TEST_CASE("p_m floor") {
    SystemParams sp;
    sp.gamma = 1.0;
    sp.eps_st = 0.25;
    ChannelState ch{1.0, 1.0, 1.0, 0.0, 1.0};
    REQUIRE(p_m(ch, sp, 0.5).value() == Approx(2.0));  // max{1/0.5, 0.25/0.5}

    ch.h1 = 0.4;
    REQUIRE_FALSE(p_m(ch, sp, 0.5).has_value());  // 0.4 - 0.5 < 0

    ch.h1 = 1.0;
    sp.eps_st = 0.0;
    REQUIRE(p_m(ch, sp, 0.5).value() == Approx(2.0));  // rate term alone
}

TEST_CASE("waterfill_block branches") {
    SystemParams sp;
    ChannelState ch{0.0, 1.0, 1.0, 0.0, 0.0};  // g1 f = 1, alpha_bar 0.5 -> a = 0.5
    const double floor = 2.0;
    REQUIRE(waterfill_block(ch, sp, 0.5, 0.75, floor) == 0.0);
    REQUIRE(waterfill_block(ch, sp, 0.5, 0.5, floor) == Approx(2.0));
    REQUIRE(waterfill_block(ch, sp, 0.5, 0.2, floor) ==
            Approx(1.0 / (0.2 * std::numbers::ln2) - 2.0).epsilon(1e-12));

    SECTION("branch continuity at the floor threshold") {
        const double t2 = 0.5 / (std::numbers::ln2 * (1.0 + 0.5 * floor));
        REQUIRE(waterfill_block(ch, sp, 0.5, t2, floor) == Approx(floor).epsilon(1e-12));
        REQUIRE(waterfill_block(ch, sp, 0.5, t2 * (1.0 + 1e-12), floor) == Approx(floor));
    }
}

TEST_CASE("p_c circuit floor") {
    SystemParams sp;
    ChannelState ch{0.0, 1.0, 1.0, 0.0, 0.0};
    SECTION("linear case") {
        sp.eps_b = 1.0;
        sp.u = 0.0;
        REQUIRE(p_c(ch, sp, 0.5) == Approx(2.0).epsilon(1e-9));
    }
    SECTION("zero requirement") {
        sp.eps_b = 0.0;
        sp.u = 0.0;
        REQUIRE(p_c(ch, sp, 0.5) == 0.0);
    }
    SECTION("log case, root verified by residual signs") {
        sp.eps_b = 1.0;
        sp.u = 1.0;
        const double pc = p_c(ch, sp, 0.5);
        const auto gap = [](double p) { return 0.5 * p - (1.0 + std::log2(1.0 + 0.5 * p)); };
        REQUIRE(gap(pc - 1e-8) < 0.0);
        REQUIRE(gap(pc + 1e-8) > 0.0);
    }
    SECTION("no harvesting path") {
        sp.eps_b = 1.0;
        ChannelState dead{0.0, 1.0, 0.0, 0.0, 0.0};
        REQUIRE_THROWS_AS(p_c(dead, sp, 0.5), NonConvergence);
    }
}

TEST_CASE("solve_p3a") {
    SystemParams sp;
    sp.gamma = 1.0;
    sp.eps_st = 0.1;
    SECTION("all blocks infeasible") {
        std::vector<ChannelState> blocks(3, ChannelState{0.1, 1.0, 1.0, 0.0, 2.0});
        // h1 - g2 a f = 0.1 - 1.0 < 0 at alpha_bar 0.5
        const auto sol = solve_p3a(blocks, sp, 0.5);
        REQUIRE(sol.feasible);
        REQUIRE(sol.capacity == 0.0);
        REQUIRE(sol.dual.lambda == 0.0);
        for (const auto& d : sol.profile) REQUIRE(d.p == 0.0);
    }
    SECTION("single block, generous budget binds exactly") {
        std::vector<ChannelState> blocks{ChannelState{1.0, 1.0, 1.0, 0.0, 1.0}};
        sp.p_av = 10.0;
        const auto sol = solve_p3a(blocks, sp, 0.5);
        REQUIRE(sol.feasible);
        REQUIRE(sol.mean_power == Approx(10.0).epsilon(1e-3));
        REQUIRE(sol.profile[0].p == Approx(10.0).epsilon(1e-3));
    }
    SECTION("floors above the budget are declared infeasible") {
        std::vector<ChannelState> blocks{ChannelState{1.0, 1.0, 1.0, 0.0, 1.0}};
        sp.p_av = 1.0;  // rate floor at alpha 0.5 is 2
        const auto sol = solve_p3a(blocks, sp, 0.5);
        REQUIRE_FALSE(sol.feasible);
    }
}

TEST_CASE("solve_p4a reduces to solve_p3a when the models coincide") {
    SystemParams sp;
    sp.gamma = 1.0;
    sp.u = 0.0;
    sp.eps_st = 0.2;
    sp.eps_b = 0.2;
    sp.p_av = 6.0;
    const auto blocks = rayleigh_blocks(50, 5);
    const auto s3 = solve_p3a(blocks, sp, 0.4);
    const auto s4 = solve_p4a(blocks, sp, 0.4);
    REQUIRE(s4.capacity == Approx(s3.capacity).margin(1e-9));
    for (std::size_t i = 0; i < blocks.size(); ++i)
        REQUIRE(s4.profile[i].p == Approx(s3.profile[i].p).margin(1e-6));
}

TEST_CASE("large static draw makes the circuit floor dominate") {
    SystemParams sp;
    sp.gamma = 1.0;
    sp.eps_b = 3.0;
    sp.u = 1.0;
    ChannelState ch{10.0, 1.0, 1.0, 0.0, 0.1};
    const double pc = p_c(ch, sp, 0.5);
    const auto rate = detail::rate_floor(ch, sp, 0.5);
    REQUIRE(pc > rate.value());
    const auto floors = detail::floors_p4(std::vector<ChannelState>{ch}, sp, 0.5);
    REQUIRE(floors[0].value() == Approx(pc));
}

TEST_CASE("4-state desk instances match the grid oracle") {
    const auto rep_ideal = verify_average_vs_oracle(EnergyModel::Ideal, 6, 31);
    INFO(rep_ideal.detail);
    REQUIRE(rep_ideal.pass);
    const auto rep_practical = verify_average_vs_oracle(EnergyModel::Practical, 6, 32);
    INFO(rep_practical.detail);
    REQUIRE(rep_practical.pass);
}

TEST_CASE("solve_p3 outer search") {
    SystemParams sp;
    sp.gamma = 1.0;
    sp.eps_st = 0.1;
    sp.p_av = 10.0;
    SECTION("all blocks infeasible at every alpha gives capacity 0 at alpha 0") {
        // f = 0 with eps_st > 0: unpowerable; rate floor infinite at every alpha.
        std::vector<ChannelState> blocks(4, ChannelState{0.0, 1.0, 0.0, 0.0, 1.0});
        const auto sol = solve_p3(blocks, sp, AlphaSearchConfig{101, 1.0 - 1e-9});
        REQUIRE(sol.feasible);
        REQUIRE(sol.capacity == 0.0);
        REQUIRE(sol.alpha == 0.0);
    }
    SECTION("single dominant block recovers the P1 optimum when budgets match") {
        std::vector<ChannelState> blocks{ChannelState{1.0, 1.0, 1.0, 0.0, 1.0}};
        sp.p_pk = sp.p_av;
        const auto p3 = solve_p3(blocks, sp, AlphaSearchConfig{1001, 1.0 - 1e-9});
        const auto p1 = solve_p1(blocks[0], sp);
        REQUIRE(p3.alpha == Approx(p1.decision.alpha).margin(1.1e-3));
        REQUIRE(p3.capacity == Approx(secondary_rate(blocks[0], p1.decision, sp)).margin(5e-3));
    }
    SECTION("grid max dominates any fixed alpha") {
        const auto blocks = rayleigh_blocks(60, 17);
        const AlphaSearchConfig acfg{101, 1.0 - 1e-9};
        const auto sol = solve_p3(blocks, sp, acfg);
        for (const double ab : {0.1, 0.25, 0.5, 0.75}) {
            const auto fixed = solve_p3a(blocks, sp, ab);
            REQUIRE(sol.capacity >= fixed.capacity - 1e-12);
        }
    }
}

TEST_CASE("complementary slackness and budget compliance, sampled") {
    SystemParams sp;
    sp.gamma = 1.0;
    sp.eps_st = 0.1;
    std::mt19937_64 rng(41);
    for (int k = 0; k < 10; ++k) {
        const auto blocks = rayleigh_blocks(80, 100 + k);
        sp.p_av = 2.0 + 1.5 * k;
        const double ab = 0.1 + 0.07 * k;
        const auto sol = solve_p3a(blocks, sp, ab);
        if (!sol.feasible) continue;
        REQUIRE(sol.mean_power <= sp.p_av * (1.0 + 1e-3));
        REQUIRE(std::abs(sol.dual.lambda * (sol.mean_power - sp.p_av)) <= 1e-3 * sp.p_av);
    }
}

TEST_CASE("capacity of solve_p3 is nondecreasing in the budget") {
    SystemParams sp;
    sp.gamma = 1.0;
    sp.eps_st = 0.1;
    const auto blocks = rayleigh_blocks(120, 55);
    const AlphaSearchConfig acfg{51, 1.0 - 1e-9};
    double prev = -1.0;
    int feasible_points = 0;
    for (const double pav : {3.0, 5.0, 8.0, 14.0, 22.0}) {
        sp.p_av = pav;
        const auto sol = solve_p3(blocks, sp, acfg);
        if (!sol.feasible) continue;  // small budgets can sit below the floor means
        ++feasible_points;
        REQUIRE(sol.capacity >= prev - 1e-12);
        prev = sol.capacity;
    }
    REQUIRE(feasible_points >= 3);
}

TEST_CASE("fixed-alpha average power never beats per-block peak allocation") {
    SystemParams sp;
    sp.gamma = 1.0;
    sp.eps_st = 0.1;
    sp.p_av = 8.0;
    sp.p_pk = 8.0;
    const auto blocks = rayleigh_blocks(200, 77);
    const auto p3 = solve_p3(blocks, sp, AlphaSearchConfig{101, 1.0 - 1e-9});
    double p1_cap = 0.0;
    for (const auto& ch : blocks) p1_cap += secondary_rate(ch, solve_p1(ch, sp).decision, sp);
    p1_cap /= static_cast<double>(blocks.size());
    REQUIRE(p3.capacity <= p1_cap + 1e-9);
}
