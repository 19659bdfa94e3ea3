#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qdl {

// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// An internal identity that must hold did not; indicates a bug.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Iterative solver hit its cap. Carries the best feasible value found.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best)
        : std::runtime_error(what), best_value(best) {}
    double best_value;
};

class UnsupportedCriterion : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised by the LP when the Bloch points admit no vertex. The certificate
// has negative inner product with every input vector.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, std::vector<double> nu)
        : std::runtime_error(what), certificate(std::move(nu)) {}
    std::vector<double> certificate;
};

} // namespace qdl
