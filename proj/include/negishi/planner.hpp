#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "negishi/economy.hpp"
#include "negishi/errors.hpp"
#include "negishi/utility.hpp"

namespace negishi {

/// Planner weights on each agent's lifetime utility, normalized to the simplex.
class NegishiWeights {
public:
    /// Distance from the simplex boundary below which weights are clamped.
    static constexpr double kBoundary = 1e-12;

    NegishiWeights() = default;

    /// Normalizes `raw` to sum one and clamps into the open simplex.
    explicit NegishiWeights(std::vector<double> raw) : w_(std::move(raw)) {
        if (w_.empty()) throw DomainError("NegishiWeights: empty weight vector");
        for (double v : w_) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw DomainError("NegishiWeights: weights must be positive and finite, got " +
                                  detail::format_value(v));
        }
        normalize();
        if (w_.size() > 1) {
            bool clamped = false;
            for (double& v : w_) {
                if (v < kBoundary) {
                    v = kBoundary;
                    clamped = true;
                }
            }
            if (clamped) normalize();
        }
    }

    static NegishiWeights uniform(std::size_t n) { return NegishiWeights(std::vector<double>(n, 1.0)); }

    /// Two-agent weights (gamma, 1 - gamma).
    static NegishiWeights pair(double gamma) { return NegishiWeights({gamma, 1.0 - gamma}); }

    std::size_t size() const noexcept { return w_.size(); }
    double operator[](std::size_t j) const { return w_.at(j); }
    const std::vector<double>& values() const noexcept { return w_; }

    /// gamma_jk = w_j / (w_j + w_k).
    double pairwise_gamma(std::size_t j, std::size_t k) const { return w_.at(j) / (w_.at(j) + w_.at(k)); }

private:
    void normalize() {
        const double s = std::accumulate(w_.begin(), w_.end(), 0.0);
        for (double& v : w_) v /= s;
    }

    std::vector<double> w_;
};

/// Present-value goods prices (p_0 = 1) alongside the nominal price level P_t.
struct PricePath {
    std::vector<double> prices;
    std::vector<double> price_level;

    std::size_t num_periods() const noexcept { return prices.size(); }
    double level(std::size_t t) const { return price_level.empty() ? 1.0 : price_level.at(t); }
};

/// consumption[j][t].
struct Allocation {
    std::vector<std::vector<double>> consumption;

    std::size_t num_agents() const noexcept { return consumption.size(); }
    std::size_t num_periods() const noexcept { return consumption.empty() ? 0 : consumption.front().size(); }
};

struct PlannerSolution {
    Allocation allocation;
    PricePath prices;
    std::vector<double> log_multipliers;  // log lambda_t
};

inline void check_shapes(const EconomySpec& econ, const Allocation& alloc, const PricePath& prices) {
    if (alloc.num_agents() != econ.num_agents())
        throw ShapeError("allocation has " + std::to_string(alloc.num_agents()) + " agents, economy has " +
                         std::to_string(econ.num_agents()));
    for (std::size_t j = 0; j < alloc.num_agents(); ++j) {
        if (alloc.consumption[j].size() != econ.num_periods())
            throw ShapeError("allocation row " + std::to_string(j) + " has " +
                             std::to_string(alloc.consumption[j].size()) + " periods, economy has " +
                             std::to_string(econ.num_periods()));
    }
    if (prices.prices.size() != econ.num_periods())
        throw ShapeError("price path has " + std::to_string(prices.prices.size()) + " periods, economy has " +
                         std::to_string(econ.num_periods()));
    if (!prices.price_level.empty() && prices.price_level.size() != econ.num_periods())
        throw ShapeError("price level path has " + std::to_string(prices.price_level.size()) + " periods");
}

namespace detail {

/// Solves sum_j exp((a_j - x)/sigma_j) = total for x, then polishes consumption so the
/// goods constraint holds to round-off. Writes consumption into `c`, returns x = log lambda.
inline double clear_period(std::span<const double> log_scale, std::span<const double> sigma, long double exact_total,
                           std::span<double> c, std::ptrdiff_t period) {
    const double total = static_cast<double>(exact_total);
    const std::size_t n = log_scale.size();
    if (!(total > 0.0) || !std::isfinite(total))
        throw SolverError("aggregate endowment not positive at period " + std::to_string(period), period);

    const double log_total = std::log(total);
    const double log_n = std::log(static_cast<double>(n));
    double lo = -HUGE_VAL, hi = -HUGE_VAL;
    for (std::size_t j = 0; j < n; ++j) {
        const double solo = log_scale[j] - sigma[j] * log_total;
        lo = std::max(lo, solo);
        hi = std::max(hi, solo + sigma[j] * log_n);
    }
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw SolverError("multiplier bracket not finite at period " + std::to_string(period), period);

    auto excess = [&](double x) {
        long double s = 0.0L;
        for (std::size_t j = 0; j < n; ++j) s += std::exp((log_scale[j] - x) / sigma[j]);
        return static_cast<double>(s - static_cast<long double>(total));
    };

    // excess is decreasing in x: nonnegative at lo, nonpositive at hi.
    double f_lo = excess(lo), f_hi = excess(hi);
    for (int iter = 0; iter < 400; ++iter) {
        const double mid = lo + 0.5 * (hi - lo);
        if (!(mid > lo && mid < hi)) break;
        const double f = excess(mid);
        if (f >= 0.0) {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    double x = std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;

    for (std::size_t j = 0; j < n; ++j) c[j] = std::exp((log_scale[j] - x) / sigma[j]);

    // Uniform shift of log lambda keeps every agent on its first-order condition.
    for (int pass = 0; pass < 3; ++pass) {
        long double sum = 0.0L, slope = 0.0L;
        for (std::size_t j = 0; j < n; ++j) {
            sum += c[j];
            slope += c[j] / sigma[j];
        }
        const long double gap = sum - static_cast<long double>(total);
        if (gap == 0.0L) break;
        const double shift = static_cast<double>(gap / slope);
        for (std::size_t j = 0; j < n; ++j) c[j] += c[j] * std::expm1(-shift / sigma[j]);
        x += shift;
    }

    // Absorb the last-bit defect into one entry so the goods constraint holds
    // exactly against the long double endowment total. Entries are tried from the
    // finest ulp upward; a candidate is only used if its relative change is negligible.
    for (int pass = 0; pass < 4; ++pass) {
        long double sum = 0.0L;
        for (std::size_t j = 0; j < n; ++j) sum += c[j];
        const long double gap = sum - exact_total;
        if (gap == 0.0L) break;
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c[a] < c[b]; });
        bool fixed = false;
        for (std::size_t j : order) {
            const double trial = static_cast<double>(static_cast<long double>(c[j]) - gap);
            if (std::abs(trial - c[j]) > 1e-13 * c[j]) continue;
            const long double new_sum = sum - c[j] + trial;
            if (new_sum == exact_total) {
                c[j] = trial;
                fixed = true;
                break;
            }
        }
        if (!fixed) {
            const std::size_t j = order.back();
            c[j] = static_cast<double>(static_cast<long double>(c[j]) - gap);
        }
    }

    for (std::size_t j = 0; j < n; ++j) {
        if (!(c[j] > 0.0) || !std::isfinite(c[j]))
            throw SolverError("planner allocation left the interior at period " + std::to_string(period) +
                                  " (agent " + std::to_string(j) + ")",
                              period);
    }
    return x;
}

}  // namespace detail

/// Per-period planner solve: w_j beta_j^t u_j'(C_jt) = lambda_t with goods clearing.
inline PlannerSolution planner_allocation(const EconomySpec& econ, const NegishiWeights& w) {
    const std::size_t n = econ.num_agents();
    const std::size_t periods = econ.num_periods();
    if (w.size() != n)
        throw ShapeError("weights have " + std::to_string(w.size()) + " entries, economy has " +
                         std::to_string(n) + " agents");

    std::vector<double> log_w(n), log_beta(n), sigma(n);
    for (std::size_t j = 0; j < n; ++j) {
        log_w[j] = std::log(w[j]);
        log_beta[j] = std::log(econ.agents[j].beta);
        sigma[j] = econ.agents[j].utility.sigma;
    }

    PlannerSolution out;
    out.allocation.consumption.assign(n, std::vector<double>(periods));
    out.log_multipliers.resize(periods);
    std::vector<double> log_scale(n), c(n);
    for (std::size_t t = 0; t < periods; ++t) {
        for (std::size_t j = 0; j < n; ++j) log_scale[j] = log_w[j] + static_cast<double>(t) * log_beta[j];
        const auto pt = static_cast<std::ptrdiff_t>(t);
        long double total = 0.0L;
        for (const auto& a : econ.agents) total += endowment_at(a.endowment, pt);
        out.log_multipliers[t] = detail::clear_period(log_scale, sigma, total, c, pt);
        for (std::size_t j = 0; j < n; ++j) out.allocation.consumption[j][t] = c[j];
    }

    out.prices.prices.resize(periods);
    for (std::size_t t = 0; t < periods; ++t)
        out.prices.prices[t] = std::exp(out.log_multipliers[t] - out.log_multipliers[0]);
    out.prices.prices[0] = 1.0;
    out.prices.price_level = price_levels(econ);
    return out;
}

/// e_j = sum_t p_t (y_jt - C_jt) + B_{j,-1} / P_0, in period-0 present value.
inline std::vector<double> budget_residuals(const EconomySpec& econ, const Allocation& alloc,
                                            const PricePath& prices) {
    check_shapes(econ, alloc, prices);
    const std::size_t n = econ.num_agents();
    std::vector<double> e(n);
    const double p0_level = prices.level(0);
    for (std::size_t j = 0; j < n; ++j) {
        long double acc = 0.0L;
        for (std::size_t t = 0; t < econ.num_periods(); ++t) {
            const double y = endowment_at(econ.agents[j].endowment, static_cast<std::ptrdiff_t>(t));
            acc += static_cast<long double>(prices.prices[t]) *
                   (static_cast<long double>(y) - static_cast<long double>(alloc.consumption[j][t]));
        }
        const double b = j < econ.initial_bonds.size() ? econ.initial_bonds[j] : 0.0;
        acc += static_cast<long double>(b) / p0_level;
        e[j] = static_cast<double>(acc);
    }
    return e;
}

/// 1 + i_t = (p_t / P_t) / (p_{t+1} / P_{t+1}) for t = 0..T-1.
inline std::vector<double> implied_interest_rates(const PricePath& prices) {
    const std::size_t periods = prices.prices.size();
    std::vector<double> rates(periods > 0 ? periods - 1 : 0);
    for (std::size_t t = 0; t + 1 < periods; ++t) {
        const double now = prices.prices[t] / prices.level(t);
        const double next = prices.prices[t + 1] / prices.level(t + 1);
        rates[t] = now / next - 1.0;
    }
    return rates;
}

/// Forward budget recursion B_jt = (1 + i_t)(B_{j,t-1} + P_t y_jt - P_t C_jt).
/// The last period settles at face value (1 + i_T := 1), so bonds[j][T] is the
/// unspent terminal claim. No terminal check; see recover_bond_path.
inline std::vector<std::vector<double>> bond_recursion(const EconomySpec& econ, const Allocation& alloc,
                                                       const PricePath& prices, std::span<const double> rates) {
    check_shapes(econ, alloc, prices);
    const std::size_t n = econ.num_agents();
    const std::size_t periods = econ.num_periods();
    if (rates.size() + 1 != periods)
        throw ShapeError("interest path has " + std::to_string(rates.size()) + " entries, expected " +
                         std::to_string(periods - 1));
    std::vector<std::vector<double>> bonds(n, std::vector<double>(periods));
    for (std::size_t j = 0; j < n; ++j) {
        long double b = j < econ.initial_bonds.size() ? econ.initial_bonds[j] : 0.0;
        for (std::size_t t = 0; t < periods; ++t) {
            const long double level = prices.level(t);
            const long double y = endowment_at(econ.agents[j].endowment, static_cast<std::ptrdiff_t>(t));
            const long double gross = t < rates.size() ? 1.0L + static_cast<long double>(rates[t]) : 1.0L;
            b = gross * (b + level * (y - static_cast<long double>(alloc.consumption[j][t])));
            bonds[j][t] = static_cast<double>(b);
        }
    }
    return bonds;
}

/// Nominal lifetime income sum_t P_t Y_t; the scale for terminal-bond checks.
inline double lifetime_income_scale(const EconomySpec& econ) {
    double s = 0.0;
    for (std::size_t t = 0; t < econ.num_periods(); ++t) {
        const auto pt = static_cast<std::ptrdiff_t>(t);
        for (const auto& a : econ.agents) s += price_level_at(econ, pt) * endowment_at(a.endowment, pt);
    }
    return s;
}

inline constexpr double kTerminalBondTolerance = 1e-6;

/// Bond paths implied by an equilibrium; throws ConsistencyFault when a terminal
/// claim exceeds kTerminalBondTolerance of lifetime income.
inline std::vector<std::vector<double>> recover_bond_path(const EconomySpec& econ, const Allocation& alloc,
                                                          const PricePath& prices, std::span<const double> rates) {
    auto bonds = bond_recursion(econ, alloc, prices, rates);
    const double limit = kTerminalBondTolerance * lifetime_income_scale(econ);
    for (std::size_t j = 0; j < bonds.size(); ++j) {
        const double terminal = bonds[j].back();
        if (!(std::abs(terminal) <= limit))
            throw ConsistencyFault("terminal bond of agent " + std::to_string(j) + " is " +
                                   detail::format_value(terminal) + ", limit " + detail::format_value(limit));
    }
    return bonds;
}

/// Autarky: every agent consumes its own endowment.
inline Allocation autarky_allocation(const EconomySpec& econ) {
    return Allocation{endowment_matrix(econ)};
}

/// Prices supporting agent `anchor`'s Euler equation at `alloc`:
/// p_t = beta^t u'(C_t) / u'(C_0).
inline PricePath anchor_prices(const EconomySpec& econ, const Allocation& alloc, std::size_t anchor = 0) {
    const auto& a = econ.agents.at(anchor);
    const auto& c = alloc.consumption.at(anchor);
    PricePath p;
    p.prices.resize(c.size());
    const double mu0 = marginal_utility(a.utility, c.at(0));
    for (std::size_t t = 0; t < c.size(); ++t)
        p.prices[t] = std::pow(a.beta, static_cast<double>(t)) * marginal_utility(a.utility, c[t]) / mu0;
    p.price_level = price_levels(econ);
    return p;
}

}  // namespace negishi
