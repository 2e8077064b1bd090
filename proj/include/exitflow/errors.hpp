#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace exitflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed, missing or inconsistent configuration (including dimension mismatches).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The requested operation is not defined for this problem (e.g. no exact solution).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// A trajectory exceeded the step cap without reaching the boundary.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t trajectory)
        : Error(what + " (trajectory " + std::to_string(trajectory) + ")"), trajectory_(trajectory) {}

    std::size_t trajectory() const noexcept { return trajectory_; }

private:
    std::size_t trajectory_;
};

/// A requested tolerance or value lies outside the range covered by the data.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Too few admissible data points for a fit.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

}  // namespace exitflow
