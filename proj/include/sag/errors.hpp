#pragma once

#include <stdexcept>
#include <string>

namespace sag {

/// Malformed files, invalid arguments, violated preconditions.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite losses or gradients, failed solver brackets.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A dense buffer would not fit the configured memory limit.
class OutOfMemoryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sag
