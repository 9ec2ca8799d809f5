#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "negishi/solver.hpp"
#include "oracles.hpp"

using namespace negishi;

namespace {

EconomySpec pair_economy(double b1, double b2, int horizon) {
    EconomySpec e;
    e.agents = {{b1, {1.0}, ConstantEndowment{1.0}}, {b2, {1.0}, ConstantEndowment{1.0}}};
    e.horizon = horizon;
    e.initial_bonds = {0.0, 0.0};
    return e;
}

EconomySpec random_economy(std::mt19937_64& rng, std::size_t n, int horizon, bool common_sigma) {
    std::uniform_real_distribution<double> beta(0.88, 0.99), level(0.5, 2.0), amp(-0.4, 0.4), bond(-0.3, 0.3);
    std::uniform_int_distribution<int> sig(1, 3);
    const double shared = sig(rng);
    EconomySpec e;
    for (std::size_t j = 0; j < n; ++j) {
        AgentSpec a{beta(rng), {common_sigma ? shared : static_cast<double>(sig(rng))}, ConstantEndowment{level(rng)}};
        if (j == 1) a.endowment = PerturbedEndowment{level(rng), amp(rng), 0.85};
        e.agents.push_back(a);
    }
    e.horizon = horizon;
    e.initial_bonds.assign(n, 0.0);
    double net = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) net += (e.initial_bonds[j] = bond(rng));
    e.initial_bonds[n - 1] = -net;
    return e;
}

}  // namespace

TEST(SolveEquilibrium, SymmetricOracle) {
    const auto r = solve_equilibrium(pair_economy(0.9, 0.9, 10));
    EXPECT_NEAR(r.weights[0], 0.5, 1e-15);
    for (const auto& row : r.allocation.consumption)
        for (double c : row) EXPECT_NEAR(c, 1.0, 1e-14);
    for (double i : r.interest_rates) EXPECT_NEAR(i, 1.0 / 0.9 - 1.0, 1e-13);
    for (const auto& row : r.bonds)
        for (double b : row) EXPECT_NEAR(b, 0.0, 1e-13);
    EXPECT_EQ(r.trace.method, "bisection");
}

TEST(SolveEquilibrium, TwoPeriodClosedFormWeight) {
    // S_1 = 1 + 0.96 + 0.9216 = 2.8816, S_2 = 1 + 0.92 + 0.8464 = 2.7664.
    const double gamma = 2.7664 / 5.6480;
    EXPECT_NEAR(oracle::log_pair_gamma(0.96, 0.92, 2), gamma, 1e-15);
    const std::vector<double> ones(3, 1.0);
    EXPECT_NEAR(oracle::log_pair_grid_gamma(0.96, 0.92, ones, ones, 1e-6), gamma, 1e-6);

    const auto r = solve_equilibrium(pair_economy(0.96, 0.92, 2));
    // Six-digit reference values, compared at their stated precision.
    EXPECT_NEAR(r.weights[0], 0.489802, 1e-6);
    EXPECT_NEAR(r.weights[0], gamma, 1e-12);
    EXPECT_NEAR(r.allocation.consumption[0][0], 2.0 * gamma, 1e-12);
    EXPECT_NEAR(r.allocation.consumption[0][0], 0.979604, 1e-6);

    // The patient agent lends at t = 0: B_{1,0} = (1 + i_0)(1 - C_10) > 0.
    EXPECT_NEAR(r.bonds[0][0], (1.0 + r.interest_rates[0]) * (1.0 - r.allocation.consumption[0][0]), 1e-14);
    EXPECT_GT(r.bonds[0][0], 0.0);
    EXPECT_NEAR(r.bonds[0][0] + r.bonds[1][0], 0.0, 1e-15);
}

TEST(SolveEquilibrium, SingleAgentAutarky) {
    EconomySpec e;
    e.agents = {{0.93, {2.5}, PerturbedEndowment{2.0, -0.3, 0.6}}};
    e.horizon = 15;
    e.initial_bonds = {0.0};
    const auto r = solve_equilibrium(e);
    EXPECT_EQ(r.weights[0], 1.0);
    EXPECT_EQ(r.trace.method, "autarky");
    for (int t = 0; t <= 15; ++t) EXPECT_NEAR(r.allocation.consumption[0][t], endowment_at(e, 0, t), 1e-15);
    for (double b : r.bonds[0]) EXPECT_NEAR(b, 0.0, 1e-14);
}

TEST(SolveEquilibrium, RejectsForcedZeroAndInvalidSpecs) {
    auto e = pair_economy(0.96, 0.92, 5);
    e.regime = BondRegime::ForcedZero;
    try {
        solve_equilibrium(e);
        FAIL() << "expected RegimeError";
    } catch (const RegimeError& err) {
        EXPECT_NE(std::string(err.what()).find("zero_bond_feasibility"), std::string::npos);
    }
    e = pair_economy(1.2, 0.92, 5);
    EXPECT_THROW(solve_equilibrium(e), ValidationError);
}

TEST(SolveEquilibrium, InfeasibleDebtDoesNotConverge) {
    auto e = pair_economy(0.9, 0.9, 2);
    e.initial_bonds = {-5.0, 5.0};  // agent 0 owes more than its lifetime income
    try {
        solve_equilibrium(e);
        FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& err) {
        EXPECT_GT(err.best_residual(), 0.0);
    }
    EconomySpec three = pair_economy(0.9, 0.9, 2);
    three.agents.push_back(three.agents[0]);
    three.initial_bonds = {-5.0, 2.5, 2.5};
    EXPECT_THROW(solve_equilibrium(three), NonConvergence);
}

TEST(SolveEquilibrium, IterationCapReportsBestResidual) {
    std::mt19937_64 rng(99);
    const auto e = random_economy(rng, 3, 30, false);
    SolveOptions opt;
    opt.max_iterations = 0;
    try {
        solve_equilibrium(e, opt);
        FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& err) {
        EXPECT_GT(err.best_residual(), 1e-10);
    }
}

TEST(SolveEquilibrium, MatchesGridSearchForShortLogEconomies) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> beta(0.85, 0.99), level(0.5, 2.0), bond(-0.2, 0.2);
    for (int trial = 0; trial < 6; ++trial) {
        const int horizon = 1 + trial % 3;
        auto e = pair_economy(beta(rng), beta(rng), horizon);
        SequenceEndowment s1, s2;
        for (int t = 0; t <= horizon; ++t) {
            s1.values.push_back(level(rng));
            s2.values.push_back(level(rng));
        }
        e.agents[0].endowment = s1;
        e.agents[1].endowment = s2;
        const double b = bond(rng);
        e.initial_bonds = {b, -b};

        // Grid search on the closed-form residual, bonds included.
        double best = 0.0, best_abs = HUGE_VAL;
        for (double g = 1e-6; g < 1.0; g += 1e-6) {
            const double v =
                std::abs(oracle::log_pair_e1(e.agents[0].beta, e.agents[1].beta, g, s1.values, s2.values, b));
            if (v < best_abs) {
                best_abs = v;
                best = g;
            }
        }
        const auto r = solve_equilibrium(e);
        EXPECT_NEAR(r.weights[0], best, 2e-6) << "trial " << trial;
    }
}

TEST(SolveEquilibrium, EquilibriumInvariantsProperty) {
    std::mt19937_64 rng(2024);
    for (std::size_t n = 2; n <= 4; ++n) {
        for (int trial = 0; trial < 6; ++trial) {
            const bool common = trial % 2 == 0;
            const auto e = random_economy(rng, n, 80, common);
            const auto r = solve_equilibrium(e);
            const auto& c = r.allocation.consumption;
            const auto& w = r.weights;

            for (int t = 0; t <= e.horizon; ++t) {
                const double lambda = std::exp(r.log_multipliers[t]);
                double bond_sum = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const auto& a = e.agents[j];
                    EXPECT_NEAR(w[j] * std::pow(a.beta, t) * marginal_utility(a.utility, c[j][t]) / lambda, 1.0, 1e-10);
                    bond_sum += r.bonds[j][t];
                }
                EXPECT_NEAR(bond_sum, 0.0, 1e-12);
            }

            // Cross-agent Euler agreement.
            for (std::size_t j = 0; j < n; ++j) {
                const auto& a = e.agents[j];
                for (int t = 0; t < e.horizon; ++t) {
                    const double lhs = a.beta * marginal_utility(a.utility, c[j][t + 1]) / marginal_utility(a.utility, c[j][t]);
                    EXPECT_NEAR(lhs, r.prices.prices[t + 1] / r.prices.prices[t], 1e-10);
                }
            }

            // Marginal-utility ratio law with gamma_jk = w_j / (w_j + w_k).
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = j + 1; k < n; ++k) {
                    const double gjk = w.pairwise_gamma(j, k);
                    const double target = (1.0 - gjk) / gjk;
                    for (int t = 0; t <= e.horizon; ++t) {
                        const double g = marginal_utility(e.agents[j].utility, c[j][t]) /
                                         marginal_utility(e.agents[k].utility, c[k][t]) *
                                         std::pow(e.agents[j].beta / e.agents[k].beta, t);
                        EXPECT_NEAR(g / target, 1.0, 1e-8);
                    }
                    if (common) {
                        const double sigma = e.agents[j].utility.sigma;
                        const double slope = std::log(e.agents[j].beta / e.agents[k].beta) / sigma;
                        for (int t = 0; t < e.horizon; ++t) {
                            const double step = std::log(c[j][t + 1] / c[k][t + 1]) - std::log(c[j][t] / c[k][t]);
                            EXPECT_NEAR(step, slope, 1e-9);
                        }
                    }
                }
            }

            EXPECT_LT(r.residuals.max_clearing(), 1e-10);
            EXPECT_LT(r.residuals.max_budget(), 1e-10);
            EXPECT_LT(r.residuals.max_euler(), 1e-10);
            EXPECT_LT(r.residuals.max_drift(), 1e-8);
        }
    }
}

TEST(SolveEquilibrium, PriceLevelOnlyRescalesNominalObjects) {
    auto e = pair_economy(0.96, 0.92, 12);
    e.initial_bonds = {0.2, -0.2};
    const auto base = solve_equilibrium(e);
    e.price_level.clear();
    for (int t = 0; t <= 12; ++t) e.price_level.push_back(std::pow(1.02, t));
    e.initial_bonds = {0.2, -0.2};  // same claims, P_0 = 1
    const auto infl = solve_equilibrium(e);
    for (int t = 0; t <= 12; ++t)
        EXPECT_NEAR(infl.allocation.consumption[0][t], base.allocation.consumption[0][t], 1e-12);
    for (int t = 0; t < 12; ++t)
        EXPECT_NEAR(1.0 + infl.interest_rates[t], (1.0 + base.interest_rates[t]) * 1.02, 1e-12);
}
