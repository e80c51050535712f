#pragma once
#include <stdexcept>
#include <string>

namespace hs {

// Bad parameters, malformed configs, violated preconditions. CLI exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Blow-up, non-convergence, indefinite covariance and friends. CLI exit code 2.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct BlowUpError : NumericError {
    double t;
    explicit BlowUpError(double time, const std::string& what_diverged)
        : NumericError("blow-up in " + what_diverged + " at t=" + std::to_string(time)), t(time) {}
};

} // namespace hs
