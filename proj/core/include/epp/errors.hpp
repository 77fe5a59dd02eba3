#pragma once

#include <stdexcept>
#include <string>

namespace epp {

// Bad input: parameters, grid configuration, preconditions.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to deliver its contract (residual, NaN,
// iteration budget, sign condition).
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double achieved = 0.0)
        : std::runtime_error(what), achieved_(achieved) {}

    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

}  // namespace epp
