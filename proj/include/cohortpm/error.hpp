#pragma once

#include <stdexcept>
#include <string>

namespace cohortpm {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration or arguments (CLI exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data violates a format or content precondition (CLI exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

/// An internal invariant did not hold (CLI exit code 3).
class InvariantError : public Error {
public:
    using Error::Error;
};

} // namespace cohortpm
