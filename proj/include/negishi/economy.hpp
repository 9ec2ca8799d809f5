#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "negishi/errors.hpp"
#include "negishi/utility.hpp"

namespace negishi {

// ---------------------------------------------------------------------------
// Endowments
// ---------------------------------------------------------------------------

struct ConstantEndowment {
    double level = 1.0;
};

/// Explicit per-period values; index t reads values[t].
struct SequenceEndowment {
    std::vector<double> values;
};

/// level * (1 + amplitude * decay^t).
struct PerturbedEndowment {
    double level = 1.0;
    double amplitude = 0.0;
    double decay = 0.0;
};

using EndowmentSpec = std::variant<ConstantEndowment, SequenceEndowment, PerturbedEndowment>;

inline const char* endowment_kind_name(const EndowmentSpec& e) {
    switch (e.index()) {
        case 0: return "Constant";
        case 1: return "Sequence";
        default: return "Perturbed";
    }
}

inline double endowment_at(const EndowmentSpec& e, std::ptrdiff_t t) {
    if (t < 0) throw IndexError("endowment_at: negative period " + std::to_string(t));
    return std::visit(
        [t](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, ConstantEndowment>) {
                return k.level;
            } else if constexpr (std::is_same_v<K, SequenceEndowment>) {
                if (static_cast<std::size_t>(t) >= k.values.size()) {
                    throw IndexError("endowment_at: period " + std::to_string(t) +
                                     " beyond sequence of length " +
                                     std::to_string(k.values.size()));
                }
                return k.values[static_cast<std::size_t>(t)];
            } else {
                return k.level * (1.0 + k.amplitude * std::pow(k.decay, static_cast<double>(t)));
            }
        },
        e);
}

/// True when the endowment is the same in every period by construction.
inline bool is_time_invariant(const EndowmentSpec& e) {
    if (std::holds_alternative<ConstantEndowment>(e)) return true;
    if (const auto* p = std::get_if<PerturbedEndowment>(&e)) return p->amplitude == 0.0;
    return false;
}

// ---------------------------------------------------------------------------
// Agents and economies
// ---------------------------------------------------------------------------

struct AgentSpec {
    double beta = 0.9;
    UtilitySpec utility;
    EndowmentSpec endowment = ConstantEndowment{1.0};
};

enum class BondRegime { FreeTrade, ForcedZero };

inline const char* regime_name(BondRegime r) {
    return r == BondRegime::FreeTrade ? "FreeTrade" : "ForcedZero";
}

/// Periods run 0..horizon inclusive. initial_bonds[j] is B_{j,-1}, the claim
/// paying at period 0. An empty price_level means P_t = 1 at every period.
struct EconomySpec {
    std::vector<AgentSpec> agents;
    int horizon = 1;
    BondRegime regime = BondRegime::FreeTrade;
    std::vector<double> initial_bonds;
    std::vector<double> price_level;

    std::size_t num_agents() const noexcept { return agents.size(); }
    std::size_t num_periods() const noexcept { return static_cast<std::size_t>(horizon) + 1; }
};

inline void check_period(const EconomySpec& econ, std::ptrdiff_t t) {
    if (t < 0 || t > econ.horizon) {
        throw IndexError("period " + std::to_string(t) + " outside horizon 0.." +
                         std::to_string(econ.horizon));
    }
}

inline double endowment_at(const EconomySpec& econ, std::size_t agent, std::ptrdiff_t t) {
    check_period(econ, t);
    return endowment_at(econ.agents.at(agent).endowment, t);
}

inline double price_level_at(const EconomySpec& econ, std::ptrdiff_t t) {
    check_period(econ, t);
    if (econ.price_level.empty()) return 1.0;
    return econ.price_level.at(static_cast<std::size_t>(t));
}

inline std::vector<double> price_levels(const EconomySpec& econ) {
    std::vector<double> out(econ.num_periods());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = price_level_at(econ, static_cast<std::ptrdiff_t>(t));
    return out;
}

/// Y_t: total goods available at t.
inline double aggregate_endowment(const EconomySpec& econ, std::ptrdiff_t t) {
    check_period(econ, t);
    double total = 0.0;
    for (const auto& a : econ.agents) total += endowment_at(a.endowment, t);
    if (!(total > 0.0)) {
        throw ValidationError("aggregate endowment at period " + std::to_string(t) +
                              " is not positive");
    }
    return total;
}

/// endowments[j][t] for t = 0..horizon.
inline std::vector<std::vector<double>> endowment_matrix(const EconomySpec& econ) {
    std::vector<std::vector<double>> y(econ.num_agents(), std::vector<double>(econ.num_periods()));
    for (std::size_t j = 0; j < econ.num_agents(); ++j)
        for (std::size_t t = 0; t < econ.num_periods(); ++t)
            y[j][t] = endowment_at(econ.agents[j].endowment, static_cast<std::ptrdiff_t>(t));
    return y;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }

    std::string summary() const {
        std::string s;
        for (const auto& v : violations) {
            if (!s.empty()) s += "; ";
            s += v.field + ": " + v.message;
        }
        return s;
    }
};

/// Relative slack allowed when checking that initial bonds net to zero.
inline constexpr double kBondNettingTolerance = 1e-9;

inline ValidationReport validate_economy(const EconomySpec& econ) {
    ValidationReport rep;
    auto add = [&rep](std::string field, std::string msg) {
        rep.violations.push_back({std::move(field), std::move(msg)});
    };

    if (econ.agents.empty()) add("agents", "at least one agent is required");
    if (econ.horizon < 1) add("horizon", "horizon must be at least 1");

    const std::size_t periods = econ.horizon >= 1 ? econ.num_periods() : 0;
    bool sequences_ok = true;

    for (std::size_t j = 0; j < econ.agents.size(); ++j) {
        const auto& a = econ.agents[j];
        const std::string base = "agents[" + std::to_string(j) + "]";
        if (!(a.beta > 0.0 && a.beta < 1.0))
            add(base + ".beta", "discount factor must lie in (0,1), got " + detail::format_value(a.beta));
        if (!(a.utility.sigma > 0.0) || !std::isfinite(a.utility.sigma))
            add(base + ".sigma", "curvature must be positive and finite, got " +
                                     detail::format_value(a.utility.sigma));

        if (const auto* s = std::get_if<SequenceEndowment>(&a.endowment)) {
            if (s->values.size() < periods) {
                add(base + ".endowment.values",
                    "sequence has " + std::to_string(s->values.size()) + " entries, horizon needs " +
                        std::to_string(periods));
                sequences_ok = false;
                continue;
            }
        }
        if (const auto* p = std::get_if<PerturbedEndowment>(&a.endowment)) {
            if (!(p->decay >= 0.0) || !std::isfinite(p->decay))
                add(base + ".endowment.decay", "decay must be nonnegative");
        }
        bool any_positive = false;
        for (std::size_t t = 0; t < periods; ++t) {
            const double y = endowment_at(a.endowment, static_cast<std::ptrdiff_t>(t));
            if (!(y >= 0.0) || !std::isfinite(y)) {
                add(base + ".endowment", "negative or non-finite endowment at period " + std::to_string(t));
                break;
            }
            if (y > 0.0) any_positive = true;
        }
        if (periods > 0 && !any_positive) add(base + ".endowment", "endowment is zero in every period");
    }

    for (std::size_t t = 0; sequences_ok && t < periods && !econ.agents.empty(); ++t) {
        double total = 0.0;
        for (const auto& a : econ.agents) {
            const double y = endowment_at(a.endowment, static_cast<std::ptrdiff_t>(t));
            if (std::isfinite(y) && y > 0.0) total += y;
        }
        if (!(total > 0.0)) {
            add("agents", "aggregate endowment is zero at period " + std::to_string(t));
            break;
        }
    }

    if (econ.initial_bonds.size() != econ.agents.size()) {
        add("initial_bonds", "expected " + std::to_string(econ.agents.size()) + " entries, got " +
                                 std::to_string(econ.initial_bonds.size()));
    } else {
        double net = 0.0, gross = 0.0;
        bool finite = true;
        for (double b : econ.initial_bonds) {
            finite = finite && std::isfinite(b);
            net += b;
            gross += std::abs(b);
        }
        if (!finite) add("initial_bonds", "entries must be finite");
        if (econ.regime == BondRegime::ForcedZero && gross != 0.0)
            add("initial_bonds", "ForcedZero requires zero initial bonds");
        if (finite && std::abs(net) > kBondNettingTolerance * std::max(1.0, gross))
            add("initial_bonds", "bonds must net to zero, sum is " + detail::format_value(net));
    }

    if (!econ.price_level.empty()) {
        if (econ.price_level.size() != periods) {
            add("price_level", "expected " + std::to_string(periods) + " entries, got " +
                                   std::to_string(econ.price_level.size()));
        } else {
            for (std::size_t t = 0; t < periods; ++t) {
                if (!(econ.price_level[t] > 0.0) || !std::isfinite(econ.price_level[t])) {
                    add("price_level[" + std::to_string(t) + "]", "price level must be positive");
                    break;
                }
            }
        }
    }
    return rep;
}

inline void require_valid(const EconomySpec& econ) {
    const auto rep = validate_economy(econ);
    if (!rep.ok()) throw ValidationError(rep.summary());
}

/// Smallest horizon T with max_j beta_j^T below tail_tol.
inline int horizon_for_tail(const std::vector<AgentSpec>& agents, double tail_tol = 1e-10) {
    double bmax = 0.0;
    for (const auto& a : agents) bmax = std::max(bmax, a.beta);
    if (!(bmax > 0.0 && bmax < 1.0)) throw DomainError("horizon_for_tail: betas must lie in (0,1)");
    return std::max(1, static_cast<int>(std::ceil(std::log(tail_tol) / std::log(bmax))));
}

}  // namespace negishi
