#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "negishi/economy.hpp"
#include "negishi/errors.hpp"
#include "negishi/solver.hpp"

namespace negishi {

/// The economy that starts at period `start` with the given claims B_{j,start-1}.
/// Endowments and price levels are the original ones shifted to start at zero.
inline EconomySpec continuation_economy(const EconomySpec& econ, std::ptrdiff_t start,
                                        std::span<const double> opening_bonds) {
    if (start < 1 || start > econ.horizon - 1)
        throw IndexError("restart period " + std::to_string(start) + " outside 1.." +
                         std::to_string(econ.horizon - 1));
    if (opening_bonds.size() != econ.num_agents()) throw ShapeError("opening bonds do not match agent count");

    EconomySpec tail;
    tail.horizon = econ.horizon - static_cast<int>(start);
    tail.regime = BondRegime::FreeTrade;
    tail.initial_bonds.assign(opening_bonds.begin(), opening_bonds.end());
    for (const auto& a : econ.agents) {
        AgentSpec shifted = a;
        SequenceEndowment seq;
        for (std::ptrdiff_t t = start; t <= econ.horizon; ++t) seq.values.push_back(endowment_at(a.endowment, t));
        shifted.endowment = std::move(seq);
        tail.agents.push_back(std::move(shifted));
    }
    if (!econ.price_level.empty())
        tail.price_level.assign(econ.price_level.begin() + start, econ.price_level.end());
    return tail;
}

/// Re-solves from period `start` given the bonds `eq` carries into it and returns the
/// largest absolute consumption gap against eq's own tail.
inline double time_consistency_check(const EconomySpec& econ, const EquilibriumResult& eq, std::ptrdiff_t start,
                                     const SolveOptions& opt = {}) {
    if (econ.regime != BondRegime::FreeTrade)
        throw RegimeError("time_consistency_check requires a FreeTrade economy");
    if (eq.bonds.size() != econ.num_agents() || eq.allocation.num_periods() != econ.num_periods())
        throw ShapeError("equilibrium does not match the economy");
    std::vector<double> opening(econ.num_agents());
    for (std::size_t j = 0; j < opening.size(); ++j) opening[j] = eq.bonds[j].at(static_cast<std::size_t>(start - 1));

    const auto tail = continuation_economy(econ, start, opening);
    const auto resolved = solve_equilibrium(tail, opt);
    double dev = 0.0;
    for (std::size_t j = 0; j < econ.num_agents(); ++j)
        for (std::size_t t = 0; t < tail.num_periods(); ++t)
            dev = std::max(dev, std::abs(resolved.allocation.consumption[j][t] -
                                         eq.allocation.consumption[j][t + static_cast<std::size_t>(start)]));
    return dev;
}

/// Deviation for every restart period 1..T-1, indexed by start - 1.
inline std::vector<double> time_consistency_profile(const EconomySpec& econ, const EquilibriumResult& eq,
                                                    const SolveOptions& opt = {}) {
    std::vector<double> out;
    for (std::ptrdiff_t s = 1; s <= econ.horizon - 1; ++s) out.push_back(time_consistency_check(econ, eq, s, opt));
    return out;
}

}  // namespace negishi
