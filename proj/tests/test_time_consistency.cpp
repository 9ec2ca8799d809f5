#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "negishi/time_consistency.hpp"

using namespace negishi;

namespace {

EconomySpec pair_economy(double b1, double b2, int horizon) {
    EconomySpec e;
    e.agents = {{b1, {1.0}, ConstantEndowment{1.0}}, {b2, {1.0}, ConstantEndowment{1.0}}};
    e.horizon = horizon;
    e.initial_bonds = {0.0, 0.0};
    return e;
}

}  // namespace

TEST(ContinuationEconomy, ShiftsEndowmentsAndPriceLevels) {
    auto e = pair_economy(0.96, 0.92, 6);
    e.agents[1].endowment = PerturbedEndowment{1.0, 0.5, 0.5};
    for (int t = 0; t <= 6; ++t) e.price_level.push_back(1.0 + 0.1 * t);
    const std::vector<double> opening{0.3, -0.3};
    const auto tail = continuation_economy(e, 2, opening);
    EXPECT_EQ(tail.horizon, 4);
    EXPECT_EQ(tail.initial_bonds, opening);
    for (int t = 0; t <= 4; ++t) {
        EXPECT_EQ(endowment_at(tail, 1, t), endowment_at(e, 1, t + 2));
        EXPECT_EQ(price_level_at(tail, t), price_level_at(e, t + 2));
    }
    EXPECT_TRUE(validate_economy(tail).ok());
    EXPECT_THROW(continuation_economy(e, 0, opening), IndexError);
    EXPECT_THROW(continuation_economy(e, 6, opening), IndexError);
    EXPECT_THROW(continuation_economy(e, 2, std::vector<double>{0.0}), ShapeError);
}

TEST(TimeConsistency, SymmetricEconomy) {
    const auto e = pair_economy(0.9, 0.9, 30);
    const auto eq = solve_equilibrium(e);
    for (double d : time_consistency_profile(e, eq)) EXPECT_LT(d, 1e-10);
}

TEST(TimeConsistency, TwoAgentLogRestartAtOne) {
    const auto e = pair_economy(0.96, 0.92, 2);
    const auto eq = solve_equilibrium(e);
    EXPECT_LT(time_consistency_check(e, eq, 1), 1e-8);
}

TEST(TimeConsistency, CorruptedBondsAreDetected) {
    const auto e = pair_economy(0.96, 0.92, 20);
    auto eq = solve_equilibrium(e);
    EXPECT_LT(time_consistency_check(e, eq, 5), 1e-8);
    eq.bonds[0][4] += 0.01;
    eq.bonds[1][4] -= 0.01;
    EXPECT_GT(time_consistency_check(e, eq, 5), 1e-4);
}

TEST(TimeConsistency, RandomizedEconomiesEveryRestart) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> beta(0.88, 0.99), level(0.5, 2.0), bond(-0.3, 0.3);
    std::uniform_int_distribution<int> sig(1, 3);
    for (std::size_t n = 2; n <= 4; ++n) {
        EconomySpec e;
        for (std::size_t j = 0; j < n; ++j)
            e.agents.push_back({beta(rng), {static_cast<double>(sig(rng))}, PerturbedEndowment{level(rng), 0.3, 0.8}});
        e.horizon = 40;
        e.initial_bonds.assign(n, 0.0);
        e.initial_bonds[0] = bond(rng);
        e.initial_bonds[1] = -e.initial_bonds[0];
        const auto eq = solve_equilibrium(e);
        const auto dev = time_consistency_profile(e, eq);
        ASSERT_EQ(dev.size(), 39u);
        for (std::size_t s = 0; s < dev.size(); ++s) EXPECT_LT(dev[s], 1e-8) << "n=" << n << " s=" << s + 1;
    }
}

TEST(TimeConsistency, RejectsForcedZero) {
    auto e = pair_economy(0.9, 0.9, 5);
    const auto eq = solve_equilibrium(e);
    e.regime = BondRegime::ForcedZero;
    EXPECT_THROW(time_consistency_check(e, eq, 1), RegimeError);
}
