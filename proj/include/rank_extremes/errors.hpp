#pragma once

#include <stdexcept>
#include <string>

namespace rank_extremes {

/// Invalid distribution or model parameter.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data cannot support the requested estimate (e.g. log of a
/// nonpositive value, no exceedances above a threshold).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent configuration (missing columns, unknown keys, bad values).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested work exceeds a hard resource bound.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative solver did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : std::runtime_error(what), last_residual_(last_residual) {}

    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

}  // namespace rank_extremes
