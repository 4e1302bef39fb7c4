#pragma once

#include <stdexcept>
#include <string>

namespace asgm {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration, preset name, or argument value. CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Grid too small for the stencil, or mismatched field shapes.
class DimensionError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ShapeMismatchError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Time argument outside [0, T].
class TimeRangeError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Feature accepted by the types but not implemented in the dynamics
/// (e.g. correlated noise with epsilon > 0).
class UnsupportedError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Numerical failure. CLI exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Explicit step produced a non-finite or runaway state.
class DivergenceError : public NumericError {
public:
    DivergenceError(double time, double max_abs);
    double time() const { return time_; }
    double max_abs() const { return max_abs_; }

private:
    double time_;
    double max_abs_;
};

/// Training loss became non-finite at a given iteration.
class TrainingDivergedError : public NumericError {
public:
    explicit TrainingDivergedError(long iteration);
    long iteration() const { return iteration_; }

private:
    long iteration_;
};

/// A Gaussian law with a zero mode variance cannot be scored.
class DegenerateVarianceError : public NumericError {
public:
    using NumericError::NumericError;
};

/// File system and file format problems. CLI exit code 4.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed header, wrong magic, truncated payload, unsupported depth.
class FormatError : public IoError {
public:
    using IoError::IoError;
};

}  // namespace asgm
