#pragma once

#include <stdexcept>
#include <string>

namespace mweights {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition or configuration problem: bad exponents, mismatched
/// lattices, non-integrable weights, malformed input files.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A runtime verification failed (sparseness, domination, bracketing).
class InvariantError : public Error {
public:
    using Error::Error;
};

} // namespace mweights
