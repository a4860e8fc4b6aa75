#pragma once

#include <stdexcept>
#include <string>

namespace smalldev {

// Base type for all library failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or degenerate model specification (all-zero window, parameter out of range).
struct ModelError : Error {
    using Error::Error;
};

// Mathematical domain violation (e.g. decay exponent p <= 1/2).
struct DomainError : Error {
    using Error::Error;
};

// Request outside the small-deviation regime (eps^2 >= sum of eigenvalues).
struct RegimeError : Error {
    using Error::Error;
};

// Memory or work budget exceeded.
struct ResourceError : Error {
    using Error::Error;
};

// Numerical failure: non-convergence, budget-limited accuracy, failed internal check.
struct NumericError : Error {
    using Error::Error;
};

// Monte Carlo result unusable (e.g. zero hits in the target region).
struct EstimateError : Error {
    using Error::Error;
};

// Structurally valid input that this implementation does not handle.
struct UnsupportedError : Error {
    using Error::Error;
};

// Command invoked without the inputs it requires (maps to CLI exit code 2).
struct UsageError : Error {
    using Error::Error;
};

} // namespace smalldev
