#pragma once

#include <stdexcept>
#include <string>

namespace ned {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input: wrong domain, bad parameters, malformed config.
struct ArgumentError : Error {
    using Error::Error;
};

// A documented precondition of an operation does not hold.
struct ContractError : Error {
    using Error::Error;
};

// A theorem's hypothesis fails, so the operation has nothing to return.
struct InapplicableError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

// Raised when a state norm crosses the overflow guard.
struct FiniteEscapeError : NumericError {
    FiniteEscapeError(const std::string& what, double escape_time)
        : NumericError(what), escape_time(escape_time) {}
    double escape_time;
};

}  // namespace ned
