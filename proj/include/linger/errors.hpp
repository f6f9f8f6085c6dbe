#pragma once

#include <stdexcept>
#include <string>

namespace linger {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid model, distribution or oracle parameter.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Not enough data for an estimator (too short a stream, too few batches).
class EstimationError : public Error {
public:
    using Error::Error;
};

/// Fewer than four sweep points remain past the minimum of F.
class InsufficientWindowError : public Error {
public:
    using Error::Error;
};

/// Configuration file or flag override failed validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Trace output would exceed the configured row limit.
class SizeGuardError : public Error {
public:
    using Error::Error;
};

}  // namespace linger
