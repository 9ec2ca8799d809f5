#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace negishi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. u'(c) at c <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Period index outside the horizon or outside a finite endowment sequence.
class IndexError : public Error {
public:
    using Error::Error;
};

/// Economy or input data violates a declared invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed spec file or path CSV.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Arrays that should describe the same economy disagree in shape.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Operation called on an economy with the wrong bond regime.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// Inner per-period solve failed to bracket or produced a non-interior allocation.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::ptrdiff_t period)
        : Error(what), period_(period) {}

    std::ptrdiff_t period() const noexcept { return period_; }

private:
    std::ptrdiff_t period_;
};

/// Outer weight iteration exhausted its budget.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double best_residual)
        : Error(what), best_residual_(best_residual) {}

    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// A result broke an identity that holds for every correct solve.
class ConsistencyFault : public Error {
public:
    using Error::Error;
};

}  // namespace negishi
