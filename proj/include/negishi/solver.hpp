#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "negishi/diagnostics.hpp"
#include "negishi/economy.hpp"
#include "negishi/errors.hpp"
#include "negishi/planner.hpp"

namespace negishi {

struct SolveOptions {
    double tol = 1e-10;  // max budget residual, period-0 present value
    int max_iterations = 10'000;
};

struct SolverTrace {
    int iterations = 0;
    double final_residual = 0.0;
    std::string method;
};

struct EquilibriumResult {
    Allocation allocation;
    PricePath prices;
    std::vector<double> interest_rates;     // i_t, t = 0..T-1
    std::vector<std::vector<double>> bonds;  // B_jt, end-of-period claims
    NegishiWeights weights;
    std::vector<double> log_multipliers;
    ResidualReport residuals;
    SolverTrace trace;
};

namespace detail {

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline std::vector<double> residuals_at(const EconomySpec& econ, const NegishiWeights& w) {
    const auto sol = planner_allocation(econ, w);
    return budget_residuals(econ, sol.allocation, sol.prices);
}

inline NegishiWeights weights_from_logs(const Eigen::VectorXd& z) {
    // Last agent's log-weight is pinned at zero.
    const Eigen::Index m = z.size();
    const double top = std::max(0.0, z.maxCoeff());
    std::vector<double> raw(static_cast<std::size_t>(m) + 1);
    for (Eigen::Index i = 0; i < m; ++i) raw[static_cast<std::size_t>(i)] = std::exp(z[i] - top);
    raw.back() = std::exp(-top);
    return NegishiWeights(std::move(raw));
}

/// Starting weights from the log-utility sharing rule w_j ∝ wealth_j / sum_t beta_j^t,
/// with wealth valued at the average discount factor.
inline Eigen::VectorXd initial_log_weights(const EconomySpec& econ) {
    const std::size_t n = econ.num_agents();
    double beta_bar = 0.0;
    for (const auto& a : econ.agents) beta_bar += a.beta / static_cast<double>(n);
    std::vector<double> raw(n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double wealth = econ.initial_bonds[j] / price_level_at(econ, 0), disc = 0.0;
        for (std::size_t t = 0; t < econ.num_periods(); ++t) {
            wealth += std::pow(beta_bar, static_cast<double>(t)) *
                      endowment_at(econ.agents[j].endowment, static_cast<std::ptrdiff_t>(t));
            disc += std::pow(econ.agents[j].beta, static_cast<double>(t));
        }
        raw[j] = wealth / disc;
        total += std::max(raw[j], 0.0);
    }
    for (double& r : raw) r = std::max(r, 1e-3 * total / static_cast<double>(n));
    Eigen::VectorXd z(static_cast<Eigen::Index>(n) - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) z[static_cast<Eigen::Index>(j)] = std::log(raw[j] / raw.back());
    return z;
}

/// Two agents: e_1 is decreasing in gamma = w_1, so bisect on (0, 1).
inline NegishiWeights solve_pair(const EconomySpec& econ, const SolveOptions& opt, SolverTrace& trace) {
    double lo = NegishiWeights::kBoundary, hi = 1.0 - NegishiWeights::kBoundary;
    double e_lo = residuals_at(econ, NegishiWeights::pair(lo))[0];
    double e_hi = residuals_at(econ, NegishiWeights::pair(hi))[0];
    trace.method = "bisection";
    if (!(e_lo >= 0.0 && e_hi <= 0.0)) {
        const double best = std::min(std::abs(e_lo), std::abs(e_hi));
        throw NonConvergence("budget residual does not change sign over the weight simplex "
                             "(no interior equilibrium)",
                             best);
    }
    while (trace.iterations < opt.max_iterations) {
        const double mid = lo + 0.5 * (hi - lo);
        if (!(mid > lo && mid < hi)) break;
        ++trace.iterations;
        const double e = residuals_at(econ, NegishiWeights::pair(mid))[0];
        if (e == 0.0) {
            lo = hi = mid;
            e_lo = e_hi = 0.0;
            break;
        }
        if (e > 0.0) {
            lo = mid;
            e_lo = e;
        } else {
            hi = mid;
            e_hi = e;
        }
    }
    return NegishiWeights::pair(std::abs(e_lo) <= std::abs(e_hi) ? lo : hi);
}

/// n >= 3: damped Newton on the first n-1 budget residuals over relative log-weights,
/// with multiplicative tatonnement when the line search stalls.
inline NegishiWeights solve_general(const EconomySpec& econ, const SolveOptions& opt, SolverTrace& trace) {
    const std::size_t n = econ.num_agents();
    const auto m = static_cast<Eigen::Index>(n - 1);
    // Trial points whose weights or allocation leave the representable range
    // (a weight underflowing to zero, say) count as infinitely bad.
    auto eval = [&](const Eigen::VectorXd& zz) {
        try {
            return residuals_at(econ, weights_from_logs(zz));
        } catch (const DomainError&) {
        } catch (const SolverError&) {
        }
        return std::vector<double>(n, HUGE_VAL);
    };
    Eigen::VectorXd z = initial_log_weights(econ);
    std::vector<double> e = eval(z);
    double norm = max_abs(e);
    bool used_tatonnement = false;
    int polish = 0;
    constexpr double kStep = 1e-7;

    // Present value of aggregate income scales the tatonnement step.
    double scale = 0.0;
    {
        const auto sol = planner_allocation(econ, weights_from_logs(z));
        for (std::size_t t = 0; t < econ.num_periods(); ++t)
            scale += sol.prices.prices[t] * aggregate_endowment(econ, static_cast<std::ptrdiff_t>(t));
    }
    double eta = 1.0;

    auto tatonnement = [&](int steps) {
        used_tatonnement = true;
        for (int s = 0; s < steps && trace.iterations < opt.max_iterations; ++s) {
            ++trace.iterations;
            const auto w = weights_from_logs(z);
            Eigen::VectorXd trial(m);
            for (Eigen::Index i = 0; i < m; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                trial[i] = std::log(w[ui]) + eta * e[ui] / scale - (std::log(w[n - 1]) + eta * e[n - 1] / scale);
            }
            const auto e_trial = eval(trial);
            const double trial_norm = max_abs(e_trial);
            if (trial_norm < norm) {
                z = trial;
                e = e_trial;
                norm = trial_norm;
                eta = std::min(eta * 1.5, 1e6);
            } else {
                eta *= 0.5;
            }
        }
    };

    while (trace.iterations < opt.max_iterations) {
        if (norm < opt.tol) {
            // Keep refining to round-off: tails re-solved from late periods magnify
            // any leftover present-value residual.
            if (++polish > 8) break;
        }
        ++trace.iterations;

        Eigen::MatrixXd jac(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            Eigen::VectorXd zp = z;
            zp[i] += kStep;
            const auto ep = eval(zp);
            for (Eigen::Index r = 0; r < m; ++r)
                jac(r, i) = (ep[static_cast<std::size_t>(r)] - e[static_cast<std::size_t>(r)]) / kStep;
        }
        Eigen::VectorXd rhs(m);
        for (Eigen::Index r = 0; r < m; ++r) rhs[r] = -e[static_cast<std::size_t>(r)];
        const Eigen::VectorXd dir = jac.fullPivLu().solve(rhs);

        bool accepted = false;
        if (dir.allFinite()) {
            double alpha = 1.0;
            for (int k = 0; k < 30; ++k, alpha *= 0.5) {
                const Eigen::VectorXd trial = z + alpha * dir;
                const auto e_trial = eval(trial);
                const double trial_norm = max_abs(e_trial);
                if (trial_norm < norm) {
                    z = trial;
                    e = e_trial;
                    norm = trial_norm;
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) {
            if (norm < opt.tol) break;  // round-off floor reached
            const double before = norm;
            tatonnement(50);
            if (!(norm < before)) break;  // stalled: neither step makes progress
        }
    }
    trace.method = used_tatonnement ? "newton+tatonnement" : "newton";
    return weights_from_logs(z);
}

}  // namespace detail

/// Competitive equilibrium of a FreeTrade economy by Negishi weight iteration.
inline EquilibriumResult solve_equilibrium(const EconomySpec& econ, const SolveOptions& opt = {}) {
    if (econ.regime == BondRegime::ForcedZero)
        throw RegimeError("solve_equilibrium needs a FreeTrade economy; use zero_bond_feasibility for ForcedZero");
    require_valid(econ);
    if (!(opt.tol > 0.0)) throw DomainError("solver tolerance must be positive");

    SolverTrace trace;
    NegishiWeights w;
    const std::size_t n = econ.num_agents();
    if (n == 1) {
        w = NegishiWeights({1.0});
        trace.method = "autarky";
    } else if (n == 2) {
        w = detail::solve_pair(econ, opt, trace);
    } else {
        w = detail::solve_general(econ, opt, trace);
    }

    auto sol = planner_allocation(econ, w);
    const auto e = budget_residuals(econ, sol.allocation, sol.prices);
    trace.final_residual = detail::max_abs(e);
    if (!(trace.final_residual < opt.tol)) {
        throw NonConvergence("weight iteration stopped after " + std::to_string(trace.iterations) +
                                 " steps with budget residual " + detail::format_value(trace.final_residual),
                             trace.final_residual);
    }

    double walras = 0.0, wealth = 0.0;
    for (double v : e) walras += v;
    for (std::size_t t = 0; t < econ.num_periods(); ++t)
        wealth += sol.prices.prices[t] * aggregate_endowment(econ, static_cast<std::ptrdiff_t>(t));
    if (std::abs(walras) > 1e-9 * std::max(1.0, wealth))
        throw ConsistencyFault("budget residuals violate Walras's law: sum " + detail::format_value(walras));

    EquilibriumResult res;
    res.interest_rates = implied_interest_rates(sol.prices);
    res.bonds = recover_bond_path(econ, sol.allocation, sol.prices, res.interest_rates);
    res.residuals = audit(econ, sol.allocation, sol.prices);
    res.allocation = std::move(sol.allocation);
    res.prices = std::move(sol.prices);
    res.log_multipliers = std::move(sol.log_multipliers);
    res.weights = std::move(w);
    res.trace = std::move(trace);
    return res;
}

}  // namespace negishi
