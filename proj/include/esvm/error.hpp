#pragma once

#include <stdexcept>
#include <string>

namespace esvm {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input or configuration (bad sizes, out-of-range parameters, malformed files).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A computation produced a non-finite value or failed to converge in a way the caller must see.
class NumericError : public Error {
public:
    using Error::Error;
};

/// I/O failure; the message always carries the offending path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace esvm
