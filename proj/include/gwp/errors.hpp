#pragma once

#include <stdexcept>
#include <string>

namespace gwp {

// Exit-code classes for the CLI: validation -> 1, numerical -> 2, I/O -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Grid or time axis of two operands differ.
class GridMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A function is not resolved on its grid (spectral tail or boundary mass too large).
class ResolutionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A time step is too large for continuous tracking of the (det Q)^{-1/2} branch.
class StepSizeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// expectation() was handed a state whose norm deviates from 1.
class NormalizationError : public ValidationError {
public:
    NormalizationError(const std::string& what, double measured_norm)
        : ValidationError(what), norm_(measured_norm) {}
    double measured_norm() const { return norm_; }

private:
    double norm_;
};

class InsufficientDataError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class BudgetExceededError : public NumericalError {
public:
    BudgetExceededError(const std::string& what, double last_tol)
        : NumericalError(what), last_tol_(last_tol) {}
    double last_achieved_tol() const { return last_tol_; }

private:
    double last_tol_;
};

} // namespace gwp
