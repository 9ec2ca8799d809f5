#pragma once

#include <cmath>
#include <sstream>

#include "negishi/errors.hpp"

namespace negishi {

/// CRRA period utility. sigma == 1 is logarithmic utility.
struct UtilitySpec {
    double sigma = 1.0;
};

namespace detail {

inline std::string format_value(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

/// u'(c) = c^(-sigma).
inline double marginal_utility(const UtilitySpec& u, double c) {
    if (!(c > 0.0)) {
        throw DomainError("marginal_utility: consumption must be positive, got " +
                          detail::format_value(c));
    }
    if (u.sigma == 1.0) return 1.0 / c;
    return std::pow(c, -u.sigma);
}

/// Inverse of u': returns c with u'(c) = m, i.e. m^(-1/sigma).
inline double inverse_marginal(const UtilitySpec& u, double m) {
    if (!(m > 0.0)) {
        throw DomainError("inverse_marginal: marginal utility must be positive, got " +
                          detail::format_value(m));
    }
    if (u.sigma == 1.0) return 1.0 / m;
    return std::pow(m, -1.0 / u.sigma);
}

/// Period utility level; only used for welfare summaries.
inline double utility_level(const UtilitySpec& u, double c) {
    if (!(c > 0.0)) {
        throw DomainError("utility_level: consumption must be positive, got " +
                          detail::format_value(c));
    }
    if (u.sigma == 1.0) return std::log(c);
    return (std::pow(c, 1.0 - u.sigma) - 1.0) / (1.0 - u.sigma);
}

}  // namespace negishi
