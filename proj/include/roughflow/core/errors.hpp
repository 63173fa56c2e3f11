#pragma once

#include <stdexcept>
#include <string>

namespace roughflow {

// Invalid user-facing input: bad grids, malformed configs, unknown keys.
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A solver left its validity envelope (NaN/Inf state, CFL violation,
// spectral blow-up, factorization failure). Carries the last time at
// which the state was still valid. CLI exit code 3.
struct NumericalAbort : std::runtime_error {
    double last_valid_time;
    NumericalAbort(const std::string& msg, double t_last)
        : std::runtime_error(msg), last_valid_time(t_last) {}
};

// Filesystem trouble while reading or writing artifacts. CLI exit code 4.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace roughflow
