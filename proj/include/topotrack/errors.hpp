#pragma once

#include <stdexcept>
#include <string>

namespace topotrack {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input has too few samples/examples for the requested operation.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Input is malformed (non-finite values, unordered times, dimension mismatch).
class RejectedInputError : public Error {
public:
    using Error::Error;
};

/// Configuration violates a documented constraint.
class RejectedConfigError : public Error {
public:
    using Error::Error;
};

/// Operation requires state that has not been established (e.g. unfitted model).
class StateError : public Error {
public:
    using Error::Error;
};

}  // namespace topotrack
