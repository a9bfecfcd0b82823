#pragma once

#include <stdexcept>
#include <string>

namespace cfmob {

// Invalid argument to a library operation (negative density, empty window, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Deployment holds fewer APs than a K-nearest query needs.
class InsufficientPointsError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

// Inconsistent experiment or generator configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Quadrature did not reach the requested tolerance.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}

    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

}  // namespace cfmob
