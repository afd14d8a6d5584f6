#pragma once

#include <stdexcept>
#include <string>

namespace paramode {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: violated type invariant, malformed configuration, bad unit.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: divergent SQUID inductance, rejected step size, NaN.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Raised by the beat analysis when fewer than two maxima are resolved.
class InsufficientPeaksError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace paramode
