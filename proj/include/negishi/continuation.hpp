#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "negishi/diagnostics.hpp"
#include "negishi/economy.hpp"
#include "negishi/errors.hpp"
#include "negishi/planner.hpp"
#include "negishi/solver.hpp"

namespace negishi {

// ---------------------------------------------------------------------------
// Families of neighboring economies
// ---------------------------------------------------------------------------

/// Member(eps): initial bonds shifted by eps * direction (t = 0 transfer).
struct InitialBondShrink {
    std::vector<double> direction;
};

/// Member(eps): agent j's endowment scaled by (1 + eps * amplitude[j] * decay^t).
struct EndowmentPerturbation {
    std::vector<double> amplitude;
    double decay = 0.5;
};

/// Member(T): the base economy with horizon T.
struct HorizonGrowth {};

using FamilyKind = std::variant<InitialBondShrink, EndowmentPerturbation, HorizonGrowth>;

inline const char* family_kind_name(const FamilyKind& k) {
    switch (k.index()) {
        case 0: return "InitialBondShrink";
        case 1: return "EndowmentPerturbation";
        default: return "HorizonGrowth";
    }
}

struct EconomyFamily {
    EconomySpec base;
    FamilyKind kind;
    std::vector<double> parameters;  // decreasing eps, or increasing horizons
    std::vector<EconomySpec> members;
};

namespace detail {

inline EndowmentSpec perturb_endowment(const EndowmentSpec& base, double amplitude, double decay, int horizon) {
    if (amplitude == 0.0) return base;
    if (const auto* c = std::get_if<ConstantEndowment>(&base)) return PerturbedEndowment{c->level, amplitude, decay};
    SequenceEndowment seq;
    for (int t = 0; t <= horizon; ++t)
        seq.values.push_back(endowment_at(base, t) * (1.0 + amplitude * std::pow(decay, static_cast<double>(t))));
    return seq;
}

}  // namespace detail

/// The family member at one parameter value. Members always trade freely.
inline EconomySpec family_member(const EconomySpec& base, const FamilyKind& kind, double parameter) {
    EconomySpec m = base;
    m.regime = BondRegime::FreeTrade;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, InitialBondShrink>) {
                m.initial_bonds.resize(base.num_agents(), 0.0);
                for (std::size_t j = 0; j < base.num_agents(); ++j) m.initial_bonds[j] += parameter * k.direction.at(j);
            } else if constexpr (std::is_same_v<K, EndowmentPerturbation>) {
                for (std::size_t j = 0; j < base.num_agents(); ++j)
                    m.agents[j].endowment = detail::perturb_endowment(base.agents[j].endowment,
                                                                      parameter * k.amplitude.at(j), k.decay,
                                                                      base.horizon);
            } else {
                m.horizon = static_cast<int>(std::llround(parameter));
            }
        },
        kind);
    return m;
}

inline EconomyFamily generate_family(const EconomySpec& base, FamilyKind kind, std::vector<double> parameters) {
    require_valid(base);
    const std::size_t n = base.num_agents();
    if (parameters.empty()) throw ValidationError("family parameters: at least one value is required");

    if (const auto* b = std::get_if<InitialBondShrink>(&kind)) {
        if (b->direction.size() != n)
            throw ValidationError("direction: expected " + std::to_string(n) + " entries, got " +
                                  std::to_string(b->direction.size()));
        double net = 0.0, gross = 0.0;
        for (double d : b->direction) {
            net += d;
            gross += std::abs(d);
        }
        if (std::abs(net) > kBondNettingTolerance * std::max(1.0, gross))
            throw ValidationError("direction: bond direction must net to zero, sum is " + detail::format_value(net));
    } else if (const auto* e = std::get_if<EndowmentPerturbation>(&kind)) {
        if (e->amplitude.size() != n)
            throw ValidationError("direction: expected " + std::to_string(n) + " entries, got " +
                                  std::to_string(e->amplitude.size()));
        if (!(e->decay >= 0.0)) throw ValidationError("decay: must be nonnegative");
    }

    const bool horizon = std::holds_alternative<HorizonGrowth>(kind);
    for (std::size_t i = 0; i < parameters.size(); ++i) {
        const double p = parameters[i];
        if (horizon) {
            if (!(p >= 1.0) || p != std::round(p))
                throw ValidationError("parameters[" + std::to_string(i) + "]: horizon must be an integer >= 1");
            if (i > 0 && !(p > parameters[i - 1]))
                throw ValidationError("parameters: horizons must be strictly increasing");
        } else {
            if (!(p >= 0.0) || !std::isfinite(p))
                throw ValidationError("parameters[" + std::to_string(i) + "]: must be nonnegative");
            if (i > 0 && !(p < parameters[i - 1]))
                throw ValidationError("parameters: values must be strictly decreasing");
        }
    }

    EconomyFamily fam{base, std::move(kind), std::move(parameters), {}};
    for (double p : fam.parameters) {
        auto m = family_member(fam.base, fam.kind, p);
        const auto rep = validate_economy(m);
        if (!rep.ok())
            throw ValidationError("member at parameter " + detail::format_value(p) + ": " + rep.summary());
        fam.members.push_back(std::move(m));
    }
    return fam;
}

// ---------------------------------------------------------------------------
// Continuation runs
// ---------------------------------------------------------------------------

struct ContinuationMember {
    double parameter = 0.0;
    EquilibriumResult equilibrium;
};

struct ContinuationRun {
    std::vector<ContinuationMember> members;
    std::size_t window = 0;              // periods compared (shared initial window)
    std::vector<double> diffs;           // sup-norm gap between consecutive members
    std::vector<double> ratio_estimates;  // diffs[k+1] / diffs[k]
    Allocation extrapolated_limit;
    bool extrapolated = false;  // false: limit is the last member
    bool monotone = false;      // every diff strictly below its predecessor
    bool converged = false;
    double tolerance = 0.0;
};

inline constexpr double kContinuationTolerance = 1e-6;

namespace detail {

inline Allocation window_of(const Allocation& a, std::size_t window) {
    Allocation out;
    for (const auto& row : a.consumption) out.consumption.emplace_back(row.begin(), row.begin() + window);
    return out;
}

/// Entrywise Aitken delta-squared on three successive values, falling back to the
/// newest when the differences are at noise level or not contracting.
inline double aitken(double x0, double x1, double x2) {
    const double d1 = x1 - x0, d2 = x2 - x1;
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(x1), std::abs(x2)});
    if (std::abs(d1) <= noise || std::abs(d2) <= noise) return x2;
    const double r = d2 / d1;
    if (!(std::abs(r) < 1.0)) return x2;
    return x2 - d2 * r / (r - 1.0);
}

}  // namespace detail

/// Solves each member in order and extrapolates the equilibrium allocation as the
/// perturbation vanishes.
inline ContinuationRun run_continuation(const EconomyFamily& family, double tol = kContinuationTolerance,
                                        const SolveOptions& opt = {}) {
    ContinuationRun run;
    run.tolerance = tol;
    for (std::size_t i = 0; i < family.members.size(); ++i) {
        const double p = family.parameters[i];
        try {
            run.members.push_back({p, solve_equilibrium(family.members[i], opt)});
        } catch (const NonConvergence& e) {
            throw NonConvergence("member at parameter " + detail::format_value(p) + ": " + e.what(), e.best_residual());
        } catch (const Error& e) {
            throw NonConvergence("member at parameter " + detail::format_value(p) + ": " + e.what(),
                                 std::numeric_limits<double>::infinity());
        }
    }
    if (run.members.empty()) return run;

    run.window = run.members.front().equilibrium.allocation.num_periods();
    for (const auto& m : run.members) run.window = std::min(run.window, m.equilibrium.allocation.num_periods());

    std::vector<Allocation> windows;
    for (const auto& m : run.members) windows.push_back(detail::window_of(m.equilibrium.allocation, run.window));

    for (std::size_t k = 1; k < windows.size(); ++k) {
        double d = 0.0;
        for (std::size_t j = 0; j < windows[k].num_agents(); ++j)
            for (std::size_t t = 0; t < run.window; ++t)
                d = std::max(d, std::abs(windows[k].consumption[j][t] - windows[k - 1].consumption[j][t]));
        run.diffs.push_back(d);
    }
    for (std::size_t k = 1; k < run.diffs.size(); ++k)
        run.ratio_estimates.push_back(run.diffs[k - 1] == 0.0 ? 0.0 : run.diffs[k] / run.diffs[k - 1]);

    run.monotone = !run.diffs.empty();
    for (std::size_t k = 1; k < run.diffs.size(); ++k) run.monotone = run.monotone && run.diffs[k] < run.diffs[k - 1];

    bool geometric = run.ratio_estimates.size() >= 3;
    for (std::size_t k = run.ratio_estimates.size() >= 3 ? run.ratio_estimates.size() - 3 : 0;
         k < run.ratio_estimates.size(); ++k)
        geometric = geometric && run.ratio_estimates[k] < 1.0;

    run.extrapolated_limit = windows.back();
    if (geometric) {
        const auto& a0 = windows[windows.size() - 3];
        const auto& a1 = windows[windows.size() - 2];
        const auto& a2 = windows.back();
        for (std::size_t j = 0; j < a2.num_agents(); ++j)
            for (std::size_t t = 0; t < run.window; ++t)
                run.extrapolated_limit.consumption[j][t] =
                    detail::aitken(a0.consumption[j][t], a1.consumption[j][t], a2.consumption[j][t]);
        run.extrapolated = true;
    }
    run.converged = geometric && run.diffs.back() < tol;
    return run;
}

// ---------------------------------------------------------------------------
// Limit report
// ---------------------------------------------------------------------------

struct LimitSummary {
    Allocation limit;
    PricePath prices;  // supporting agent 0's Euler equation at the limit
    ResidualReport audit;
    AuditVerdict verdict;
    double max_drift = 0.0;
    std::vector<double> member_bond_sup;  // sup_jt |B_jt| per member
    double limit_bond_sup = 0.0;          // sup |B| of the limit under the base's opening bonds
    double autarky_gap = 0.0;             // sup |C - y|
    bool base_forced_zero = false;
    bool satisfies_forced_constraint = true;
};

/// Audits the extrapolated limit against the base economy restricted to the compared window.
inline LimitSummary limit_report(const ContinuationRun& run, const EconomySpec& base,
                                 const AuditTolerances& tol = {}) {
    LimitSummary out;
    if (run.members.empty()) throw ValidationError("limit_report: run has no members");
    out.limit = run.extrapolated_limit;

    EconomySpec target = base;
    target.regime = BondRegime::FreeTrade;
    target.horizon = static_cast<int>(run.window) - 1;
    if (!target.price_level.empty()) target.price_level.resize(run.window);

    out.prices = anchor_prices(target, out.limit, 0);
    out.audit = audit(target, out.limit, out.prices);
    out.verdict = judge(out.audit, tol);
    out.max_drift = out.audit.max_drift();

    for (const auto& m : run.members) {
        double s = 0.0;
        for (const auto& row : m.equilibrium.bonds)
            for (double b : row) s = std::max(s, std::abs(b));
        out.member_bond_sup.push_back(s);
    }

    const auto rates = implied_interest_rates(out.prices);
    for (const auto& row : bond_recursion(target, out.limit, out.prices, rates))
        for (double b : row) out.limit_bond_sup = std::max(out.limit_bond_sup, std::abs(b));
    const auto y = endowment_matrix(target);
    for (std::size_t j = 0; j < y.size(); ++j)
        for (std::size_t t = 0; t < y[j].size(); ++t)
            out.autarky_gap = std::max(out.autarky_gap, std::abs(out.limit.consumption[j][t] - y[j][t]));

    out.base_forced_zero = base.regime == BondRegime::ForcedZero;
    if (out.base_forced_zero) out.satisfies_forced_constraint = out.limit_bond_sup <= run.tolerance;
    return out;
}

}  // namespace negishi
