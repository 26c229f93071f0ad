#pragma once

#include <stdexcept>
#include <string>

namespace cbev {

/// Raised when a caller passes arguments that violate an operation's preconditions
/// (out-of-bounds indices, mismatched dimensions, malformed records).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for file-system and codec failures.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cbev
