#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "negishi/economy.hpp"

using namespace negishi;

namespace {

EconomySpec two_agents(double b1 = 0.9, double b2 = 0.9) {
    EconomySpec e;
    e.agents = {{b1, {1.0}, ConstantEndowment{1.0}}, {b2, {1.0}, ConstantEndowment{1.0}}};
    e.horizon = 10;
    e.initial_bonds = {0.0, 0.0};
    return e;
}

bool has_violation(const ValidationReport& r, const std::string& field, const std::string& fragment) {
    for (const auto& v : r.violations)
        if (v.field == field && v.message.find(fragment) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST(Endowment, KnownValues) {
    EXPECT_DOUBLE_EQ(endowment_at(ConstantEndowment{1.0}, 7), 1.0);
    EXPECT_DOUBLE_EQ(endowment_at(PerturbedEndowment{1.0, 0.5, 0.5}, 1), 1.25);
    EXPECT_DOUBLE_EQ(endowment_at(PerturbedEndowment{1.0, 0.0, 0.9}, 3), 1.0);
    EXPECT_DOUBLE_EQ(endowment_at(SequenceEndowment{{3.0, 4.0}}, 1), 4.0);
}

TEST(Endowment, OutOfRangeIndex) {
    EXPECT_THROW(endowment_at(SequenceEndowment{{1.0, 2.0}}, 2), IndexError);
    EXPECT_THROW(endowment_at(ConstantEndowment{1.0}, -1), IndexError);
    const auto e = two_agents();
    EXPECT_THROW(endowment_at(e, 0, 11), IndexError);
    EXPECT_THROW(aggregate_endowment(e, 11), IndexError);
}

TEST(Endowment, PerturbedConvergesToLevel) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> level(0.1, 5.0), amp(-0.9, 2.0), rho(0.0, 0.99);
    for (int i = 0; i < 200; ++i) {
        const PerturbedEndowment p{level(rng), amp(rng), rho(rng)};
        for (int t = 0; t < 60; ++t) {
            const double gap = std::abs(endowment_at(p, t) - p.level);
            // Allow the rounding of level * (1 + a rho^t) - level: a few ulps of level.
            const double rounding = 4.0 * std::numeric_limits<double>::epsilon() * p.level;
            EXPECT_LE(gap, p.level * std::abs(p.amplitude) * std::pow(p.decay, t) * (1 + 1e-12) + rounding);
        }
    }
}

TEST(Endowment, ZeroAmplitudeMatchesConstant) {
    for (int t = 0; t < 20; ++t)
        EXPECT_EQ(endowment_at(PerturbedEndowment{1.7, 0.0, 0.3}, t), endowment_at(ConstantEndowment{1.7}, t));
    EXPECT_TRUE(is_time_invariant(PerturbedEndowment{1.7, 0.0, 0.3}));
    EXPECT_FALSE(is_time_invariant(PerturbedEndowment{1.7, 0.1, 0.3}));
}

TEST(AggregateEndowment, KnownValues) {
    auto e = two_agents();
    EXPECT_DOUBLE_EQ(aggregate_endowment(e, 0), 2.0);

    EconomySpec one;
    one.agents = {{0.9, {1.0}, ConstantEndowment{3.0}}};
    one.horizon = 6;
    one.initial_bonds = {0.0};
    EXPECT_DOUBLE_EQ(aggregate_endowment(one, 5), 3.0);

    e.agents[1].endowment = PerturbedEndowment{1.0, 0.5, 0.5};
    EXPECT_DOUBLE_EQ(aggregate_endowment(e, 0), 2.5);
}

TEST(AggregateEndowment, ZeroTotalIsValidationError) {
    auto e = two_agents();
    e.agents[0].endowment = SequenceEndowment{std::vector<double>(11, 0.0)};
    e.agents[1].endowment = SequenceEndowment{std::vector<double>(11, 0.0)};
    EXPECT_THROW(aggregate_endowment(e, 0), ValidationError);
    EXPECT_TRUE(has_violation(validate_economy(e), "agents", "aggregate endowment is zero"));
}

TEST(Validate, SymmetricSpecPasses) { EXPECT_TRUE(validate_economy(two_agents()).ok()); }

TEST(Validate, ForcedZeroRequiresZeroBonds) {
    auto e = two_agents();
    e.regime = BondRegime::ForcedZero;
    e.initial_bonds = {0.1, -0.1};
    const auto r = validate_economy(e);
    EXPECT_TRUE(has_violation(r, "initial_bonds", "ForcedZero requires zero initial bonds"));
}

TEST(Validate, BondsMustNetToZero) {
    auto e = two_agents();
    e.initial_bonds = {0.2, 0.1};
    EXPECT_TRUE(has_violation(validate_economy(e), "initial_bonds", "bonds must net to zero"));
}

TEST(Validate, FieldNamesInViolations) {
    auto e = two_agents();
    e.agents[0].beta = 1.2;
    e.agents[1].utility.sigma = -1.0;
    e.horizon = 0;
    const auto r = validate_economy(e);
    EXPECT_TRUE(has_violation(r, "agents[0].beta", "(0,1)"));
    EXPECT_TRUE(has_violation(r, "agents[1].sigma", "positive"));
    EXPECT_TRUE(has_violation(r, "horizon", "at least 1"));
    EXPECT_THROW(require_valid(e), ValidationError);
}

TEST(Validate, ShapeProblems) {
    auto e = two_agents();
    e.initial_bonds = {0.0};
    EXPECT_TRUE(has_violation(validate_economy(e), "initial_bonds", "expected 2"));

    e = two_agents();
    e.agents[0].endowment = SequenceEndowment{{1.0, 1.0}};
    EXPECT_TRUE(has_violation(validate_economy(e), "agents[0].endowment.values", "horizon needs 11"));

    e = two_agents();
    e.price_level = {1.0, 1.0};
    EXPECT_TRUE(has_violation(validate_economy(e), "price_level", "expected 11"));
    e.price_level.assign(11, 1.0);
    e.price_level[4] = 0.0;
    EXPECT_TRUE(has_violation(validate_economy(e), "price_level[4]", "positive"));

    e = two_agents();
    e.agents[1].endowment = SequenceEndowment{{1, 1, 1, -1, 1, 1, 1, 1, 1, 1, 1}};
    EXPECT_TRUE(has_violation(validate_economy(e), "agents[1].endowment", "negative"));

    e = two_agents();
    e.agents.clear();
    e.initial_bonds.clear();
    EXPECT_TRUE(has_violation(validate_economy(e), "agents", "at least one"));
}

TEST(Horizon, TailBound) {
    const std::vector<AgentSpec> agents{{0.9, {1.0}, ConstantEndowment{1.0}}, {0.5, {1.0}, ConstantEndowment{1.0}}};
    const int t = horizon_for_tail(agents, 1e-10);
    EXPECT_LT(std::pow(0.9, t), 1e-10);
    EXPECT_GE(std::pow(0.9, t - 1), 1e-10);
}
