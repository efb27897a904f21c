#pragma once

#include <stdexcept>
#include <string>

namespace layerctl {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A point lies outside the admissible region.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Step-size underflow or other integrator breakdown.
class IntegrationError : public Error {
public:
    using Error::Error;
};

/// A sampled profile does not decay enough for the requested quantity.
class TruncationError : public Error {
public:
    using Error::Error;
};

/// An error that carries a scalar defect, e.g. a compatibility integral.
class DefectError : public Error {
public:
    DefectError(const std::string& what, double defect) : Error(what), defect_(defect) {}
    double defect() const noexcept { return defect_; }

private:
    double defect_;
};

/// Exponent guard tripped; carries the natural log of the magnitude.
class OverflowGuardError : public Error {
public:
    OverflowGuardError(const std::string& what, double log_magnitude)
        : Error(what), log_magnitude_(log_magnitude) {}
    double log_magnitude() const noexcept { return log_magnitude_; }

private:
    double log_magnitude_;
};

}  // namespace layerctl
