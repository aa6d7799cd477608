#pragma once

#include <stdexcept>
#include <string>

namespace volcast {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Incompatible array shapes; message names the op and the shapes involved.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid argument value (nonpositive std, bad ratio, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// API misuse (backward on non-scalar, repeated backward without reset, ...).
class UsageError : public Error {
public:
    using Error::Error;
};

// An op produced NaN/Inf. Never propagated silently.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

// Bad or unreadable input data (CSV parse failures, short series, ...).
class DataError : public Error {
public:
    using Error::Error;
};

// Bad run configuration (unknown keys, missing paths, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Training or evaluation hit a nonfinite intermediate. Carries the timestep.
class DivergenceError : public Error {
public:
    DivergenceError(int timestep, const std::string& msg)
        : Error("divergence at t=" + std::to_string(timestep) + ": " + msg),
          timestep_(timestep) {}
    int timestep() const { return timestep_; }

private:
    int timestep_;
};

}  // namespace volcast
