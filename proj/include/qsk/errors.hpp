#pragma once

#include <stdexcept>
#include <string>

namespace qsk {

// Input or precondition problem: bad parameters, malformed data, undersized budgets.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Size-limit violations (state-space caps and similar). A flavor of validation failure.
class CapacityError : public ValidationError {
public:
    explicit CapacityError(const std::string& what) : ValidationError(what) {}
};

// The computation itself went bad: non-finite values, eigensolver failure,
// estimators with no usable samples.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qsk
