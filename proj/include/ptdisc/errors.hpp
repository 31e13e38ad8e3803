#pragma once

#include <stdexcept>
#include <string>

namespace ptdisc {

// Base of all recoverable domain failures (invalid inputs, infeasible
// designs). The CLI maps these to exit code 1.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition on a plain parameter was violated.
class InvalidParameter : public DomainError {
public:
    using DomainError::DomainError;
};

// |r sin(beta)| >= s: the Hamiltonian eigenvalues are complex.
class BrokenPTRegime : public DomainError {
public:
    using DomainError::DomainError;
};

// A state has (numerically) vanishing norm under the requested metric.
class ZeroCPTNorm : public DomainError {
public:
    using DomainError::DomainError;
};

// No unbroken-regime metric renders the requested pair CPT-orthogonal.
class NotOrthogonalizable : public DomainError {
public:
    using DomainError::DomainError;
};

// The evolved Hermitian overlap never drops below tolerance within one
// period. Carries the smallest |overlap| that was reached.
class NoOrthogonalizingTime : public DomainError {
public:
    NoOrthogonalizingTime(const std::string& what, double achieved)
        : DomainError(what), achieved_minimum(achieved) {}

    double achieved_minimum;
};

// A candidate outside the measured pair is also orthogonal under a
// round's metric, so a zero outcome would not identify a unique state.
class DegenerateTriple : public DomainError {
public:
    using DomainError::DomainError;
};

}  // namespace ptdisc
