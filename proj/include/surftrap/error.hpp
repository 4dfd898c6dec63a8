#pragma once

#include <stdexcept>
#include <string>

namespace surftrap {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad parameters, schema violations, unknown names.
class InputError : public Error {
public:
    using Error::Error;
};

/// A well-formed request that cannot be satisfied under its constraints
/// (voltage bounds, fabrication limits, unstable wells).
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Iterative procedure failed to converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace surftrap
