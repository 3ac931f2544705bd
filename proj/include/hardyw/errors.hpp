#pragma once

#include <stdexcept>
#include <string>

namespace hardyw {

// Bad user input: amplitude invariants, dimension mismatches, out-of-range qubit counts.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// A parameterization that leaves the model's domain: zero/huge w-vectors,
// representation vectors at infinity fed into a finite-only formula.
class degenerate_error : public std::runtime_error {
public:
    explicit degenerate_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Optimizer could not drive constraint residuals below target.
class infeasible_error : public std::runtime_error {
public:
    infeasible_error(const std::string& msg, double residual_max)
        : std::runtime_error(msg), residual_max(residual_max) {}
    double residual_max = 0.0;
};

// Violated internal contract (e.g. probability far outside [0,1]).
class internal_error : public std::logic_error {
public:
    explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace hardyw
