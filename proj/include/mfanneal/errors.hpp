#pragma once

#include <stdexcept>
#include <string>

namespace mfanneal {

/// Invalid user input: malformed files, bad parameter values, inconsistent data.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Request exceeds a hard size limit of an exhaustive or dense method.
class CapabilityError : public std::runtime_error {
public:
    explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical breakdown (overflow, NaN, runaway iteration) distinct from a
/// detected flow singularity, which is a regular analysis outcome.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal consistency violation, e.g. a converged flow whose rounded spins
/// fail the fixed-point check. Points at a tolerance problem, not at input.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

} // namespace mfanneal
