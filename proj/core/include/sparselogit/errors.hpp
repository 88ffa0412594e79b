#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sparselogit {

// Caller broke a precondition (dimension mismatch, invalid argument shape).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Out-of-range configuration value (kappa outside [0,1), s > p, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Input data that does not satisfy the model's requirements.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A non-finite value appeared during evaluation.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::size_t index)
        : std::runtime_error(what + " (index " + std::to_string(index) + ")"),
          index_(index) {}
    explicit NumericError(const std::string& what)
        : std::runtime_error(what), index_(static_cast<std::size_t>(-1)) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// Tuning-parameter selection could not be carried out on the given path.
class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sparselogit
