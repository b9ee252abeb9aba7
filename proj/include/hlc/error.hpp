#pragma once

#include <stdexcept>
#include <string>

namespace hlc {

// Raised when user-supplied data violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a computation cannot proceed (missing moment, cap exceeded, ...).
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hlc
