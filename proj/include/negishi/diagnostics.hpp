#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "negishi/economy.hpp"
#include "negishi/errors.hpp"
#include "negishi/planner.hpp"
#include "negishi/utility.hpp"

namespace negishi {

using AgentPair = std::pair<std::size_t, std::size_t>;

/// All (j, k) with j < k, in lexicographic order.
inline std::vector<AgentPair> agent_pairs(std::size_t n) {
    std::vector<AgentPair> out;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) out.emplace_back(j, k);
    return out;
}

/// r_jt = beta_j u'(C_{j,t+1}) / u'(C_jt) - p_{t+1} / p_t, for t = 0..T-1.
inline std::vector<std::vector<double>> euler_residuals(const EconomySpec& econ, const Allocation& alloc,
                                                        const PricePath& prices) {
    check_shapes(econ, alloc, prices);
    const std::size_t periods = econ.num_periods();
    std::vector<std::vector<double>> r(econ.num_agents(), std::vector<double>(periods - 1));
    for (std::size_t j = 0; j < econ.num_agents(); ++j) {
        const auto& a = econ.agents[j];
        const auto& c = alloc.consumption[j];
        for (std::size_t t = 0; t + 1 < periods; ++t) {
            const double lhs = a.beta * marginal_utility(a.utility, c[t + 1]) / marginal_utility(a.utility, c[t]);
            r[j][t] = lhs - prices.prices[t + 1] / prices.prices[t];
        }
    }
    return r;
}

/// (sum_j C_jt - Y_t) / Y_t.
inline std::vector<double> clearing_residuals(const EconomySpec& econ, const Allocation& alloc) {
    if (alloc.num_agents() != econ.num_agents() || alloc.num_periods() != econ.num_periods())
        throw ShapeError("allocation shape does not match economy");
    std::vector<double> r(econ.num_periods());
    for (std::size_t t = 0; t < r.size(); ++t) {
        const auto pt = static_cast<std::ptrdiff_t>(t);
        long double sum = 0.0L, total = 0.0L;
        for (std::size_t j = 0; j < econ.num_agents(); ++j) {
            sum += alloc.consumption[j][t];
            total += endowment_at(econ.agents[j].endowment, pt);
        }
        r[t] = static_cast<double>((sum - total) / total);
    }
    return r;
}

struct MuRatioPath {
    std::vector<double> series;  // g_t
    double drift = 0.0;          // max_t |g_t / g_0 - 1|
};

/// g_t = [u_j'(C_jt) / u_k'(C_kt)] * (beta_j / beta_k)^t. Constant in t at an
/// equilibrium, where it equals (1 - gamma_jk) / gamma_jk.
inline MuRatioPath mu_ratio_path(const EconomySpec& econ, const Allocation& alloc, std::size_t j, std::size_t k) {
    if (j == k) throw DomainError("mu_ratio_path: agents must differ, got " + std::to_string(j) + " twice");
    if (j >= econ.num_agents() || k >= econ.num_agents() || alloc.num_agents() != econ.num_agents())
        throw ShapeError("mu_ratio_path: agent index out of range");
    const auto& aj = econ.agents[j];
    const auto& ak = econ.agents[k];
    const double ratio = aj.beta / ak.beta;
    MuRatioPath out;
    out.series.resize(alloc.num_periods());
    for (std::size_t t = 0; t < out.series.size(); ++t) {
        out.series[t] = marginal_utility(aj.utility, alloc.consumption[j][t]) /
                        marginal_utility(ak.utility, alloc.consumption[k][t]) *
                        std::pow(ratio, static_cast<double>(t));
    }
    for (double g : out.series) out.drift = std::max(out.drift, std::abs(g / out.series.front() - 1.0));
    return out;
}

/// Bundled residuals of an allocation against the first-order system.
struct ResidualReport {
    std::vector<std::vector<double>> euler;  // [agent][t], t = 0..T-1
    std::vector<double> clearing;            // [t], relative
    std::vector<double> budget;              // [agent]
    std::vector<AgentPair> pairs;
    std::vector<double> mu_ratio_drift;  // [pair]
    std::vector<double> implied_gamma;   // [pair], 1 / (1 + g_0)

    double max_euler() const {
        double m = 0.0;
        for (const auto& row : euler)
            for (double v : row) m = std::max(m, std::abs(v));
        return m;
    }
    double max_clearing() const {
        double m = 0.0;
        for (double v : clearing) m = std::max(m, std::abs(v));
        return m;
    }
    double max_budget() const {
        double m = 0.0;
        for (double v : budget) m = std::max(m, std::abs(v));
        return m;
    }
    double max_drift() const {
        double m = 0.0;
        for (double v : mu_ratio_drift) m = std::max(m, v);
        return m;
    }
};

inline ResidualReport audit(const EconomySpec& econ, const Allocation& alloc, const PricePath& prices) {
    check_shapes(econ, alloc, prices);
    ResidualReport rep;
    rep.euler = euler_residuals(econ, alloc, prices);
    rep.clearing = clearing_residuals(econ, alloc);
    rep.budget = budget_residuals(econ, alloc, prices);
    rep.pairs = agent_pairs(econ.num_agents());
    for (const auto& [j, k] : rep.pairs) {
        const auto path = mu_ratio_path(econ, alloc, j, k);
        rep.mu_ratio_drift.push_back(path.drift);
        rep.implied_gamma.push_back(1.0 / (1.0 + path.series.front()));
    }
    return rep;
}

struct AuditTolerances {
    double euler = 1e-10;
    double clearing = 1e-10;
    double budget = 1e-10;
    double drift = 1e-8;
};

struct AuditVerdict {
    bool euler_ok = false;
    bool clearing_ok = false;
    bool budget_ok = false;
    bool drift_ok = false;

    bool ok() const noexcept { return euler_ok && clearing_ok && budget_ok && drift_ok; }
};

inline AuditVerdict judge(const ResidualReport& rep, const AuditTolerances& tol = {}) {
    return {rep.max_euler() < tol.euler, rep.max_clearing() < tol.clearing, rep.max_budget() < tol.budget,
            rep.max_drift() < tol.drift};
}

/// Location of the largest absolute entry in a residual array.
struct Offender {
    std::size_t agent = 0;
    std::size_t period = 0;
    double value = 0.0;
};

inline Offender worst_euler(const ResidualReport& rep) {
    Offender o;
    for (std::size_t j = 0; j < rep.euler.size(); ++j)
        for (std::size_t t = 0; t < rep.euler[j].size(); ++t)
            if (std::abs(rep.euler[j][t]) > std::abs(o.value)) o = {j, t, rep.euler[j][t]};
    return o;
}

inline Offender worst_clearing(const ResidualReport& rep) {
    Offender o;
    for (std::size_t t = 0; t < rep.clearing.size(); ++t)
        if (std::abs(rep.clearing[t]) > std::abs(o.value)) o = {0, t, rep.clearing[t]};
    return o;
}

inline Offender worst_budget(const ResidualReport& rep) {
    Offender o;
    for (std::size_t j = 0; j < rep.budget.size(); ++j)
        if (std::abs(rep.budget[j]) > std::abs(o.value)) o = {j, 0, rep.budget[j]};
    return o;
}

// ---------------------------------------------------------------------------
// Forced-zero-bond detector
// ---------------------------------------------------------------------------

enum class Verdict { Consistent, Inconsistent };

inline const char* verdict_name(Verdict v) { return v == Verdict::Consistent ? "Consistent" : "Inconsistent"; }

struct ConsistencyReport {
    BondRegime regime = BondRegime::ForcedZero;
    std::vector<double> required_rates;                   // [agent], gross 1 + i demanded at t = 0
    std::vector<std::vector<double>> required_rate_path;  // [agent][t], t = 0..T-1
    double rate_spread = 0.0;                             // max over t of the cross-agent spread
    std::size_t worst_period = 0;
    std::vector<AgentPair> pairs;
    std::vector<double> drift_per_period;  // [pair], |log(beta_j / beta_k)|
    double tolerance = 0.0;
    Verdict verdict = Verdict::Consistent;
};

inline constexpr double kRateSpreadTolerance = 1e-12;

/// With B_it = 0 the budget pins consumption to endowments. Reports the gross
/// rate each agent's Euler equation requires at that allocation and whether one
/// interest path can satisfy all of them.
inline ConsistencyReport zero_bond_feasibility(const EconomySpec& econ, double tolerance = kRateSpreadTolerance) {
    if (econ.regime != BondRegime::ForcedZero)
        throw RegimeError("zero_bond_feasibility requires a ForcedZero economy, got FreeTrade");
    require_valid(econ);

    const Allocation alloc = autarky_allocation(econ);
    const std::size_t n = econ.num_agents();
    const std::size_t periods = econ.num_periods();

    ConsistencyReport rep;
    rep.regime = econ.regime;
    rep.tolerance = tolerance;
    rep.required_rate_path.assign(n, std::vector<double>(periods - 1));
    for (std::size_t j = 0; j < n; ++j) {
        const auto& a = econ.agents[j];
        for (std::size_t t = 0; t + 1 < periods; ++t) {
            const double now = marginal_utility(a.utility, alloc.consumption[j][t]);
            const double next = marginal_utility(a.utility, alloc.consumption[j][t + 1]);
            // Gross real rate times inflation: nominal rate that agent j's Euler equation requires.
            const double inflation = price_level_at(econ, static_cast<std::ptrdiff_t>(t + 1)) /
                                     price_level_at(econ, static_cast<std::ptrdiff_t>(t));
            rep.required_rate_path[j][t] = now / (a.beta * next) * inflation;
        }
        rep.required_rates.push_back(rep.required_rate_path[j].front());
    }

    for (std::size_t t = 0; t + 1 < periods; ++t) {
        double lo = HUGE_VAL, hi = -HUGE_VAL;
        for (std::size_t j = 0; j < n; ++j) {
            lo = std::min(lo, rep.required_rate_path[j][t]);
            hi = std::max(hi, rep.required_rate_path[j][t]);
        }
        if (hi - lo > rep.rate_spread) {
            rep.rate_spread = hi - lo;
            rep.worst_period = t;
        }
    }

    rep.pairs = agent_pairs(n);
    for (const auto& [j, k] : rep.pairs)
        rep.drift_per_period.push_back(std::abs(std::log(econ.agents[j].beta / econ.agents[k].beta)));

    // Under B = 0 the recursion must leave every position at zero whatever the rates.
    std::vector<double> rates(periods - 1);
    for (std::size_t t = 0; t + 1 < periods; ++t) rates[t] = rep.required_rate_path[0][t] - 1.0;
    PricePath p{std::vector<double>(periods, 1.0), price_levels(econ)};
    for (const auto& row : bond_recursion(econ, alloc, p, rates))
        for (double b : row)
            if (b != 0.0) throw ConsistencyFault("autarky under ForcedZero produced a nonzero bond position");

    rep.verdict = rep.rate_spread > tolerance ? Verdict::Inconsistent : Verdict::Consistent;
    return rep;
}

}  // namespace negishi
