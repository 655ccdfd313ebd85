#pragma once

#include <stdexcept>
#include <string>

namespace rfec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition or type invariant was violated by the caller.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Conditioning, rank or convergence failure.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// File, schema or configuration problem.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace rfec
