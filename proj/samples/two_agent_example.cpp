// Solves a patient/impatient pair, then shows that forcing zero bonds on the
// same economy leaves no interest path both agents accept.
#include <cstdio>

#include "negishi/negishi.hpp"

int main() {
    using namespace negishi;

    EconomySpec econ;
    econ.agents = {{0.96, {1.0}, ConstantEndowment{1.0}}, {0.92, {1.0}, ConstantEndowment{1.0}}};
    econ.horizon = 50;
    econ.initial_bonds = {0.0, 0.0};

    const auto eq = solve_equilibrium(econ);
    std::printf("weights      %.12f %.12f\n", eq.weights[0], eq.weights[1]);
    std::printf("i_0, i_49    %.12f %.12f\n", eq.interest_rates.front(), eq.interest_rates.back());
    std::printf("C_0 at t=0   %.12f  bonds B_0,0 %.12f\n", eq.allocation.consumption[0][0], eq.bonds[0][0]);

    econ.regime = BondRegime::ForcedZero;
    const auto rep = zero_bond_feasibility(econ);
    std::printf("forced zero  %s, rate spread %.12f\n", verdict_name(rep.verdict), rep.rate_spread);
    return 0;
}
