#pragma once

#include <stdexcept>
#include <string>

namespace mbar {

// Precondition / parameter-domain violations. Mapped to exit code 3 by the CLI.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// e == v makes q = 0 and the dimensionless ratios blow up.
class SingularParameterError : public DomainError {
public:
    explicit SingularParameterError(const std::string& msg) : DomainError(msg) {}
};

// Numerical failures (conditioning, overflow, accuracy). Exit code 4.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class IllConditionedError : public NumericError {
public:
    IllConditionedError(const std::string& msg, double estimate)
        : NumericError(msg), condition_estimate(estimate) {}
    double condition_estimate;
};

class OverflowError : public NumericError {
public:
    explicit OverflowError(const std::string& msg) : NumericError(msg) {}
};

class PoleProximityError : public NumericError {
public:
    explicit PoleProximityError(const std::string& msg) : NumericError(msg) {}
};

class StabilityError : public NumericError {
public:
    explicit StabilityError(const std::string& msg) : NumericError(msg) {}
};

class AccuracyError : public NumericError {
public:
    explicit AccuracyError(const std::string& msg) : NumericError(msg) {}
};

class InsufficientDataError : public DomainError {
public:
    explicit InsufficientDataError(const std::string& msg) : DomainError(msg) {}
};

} // namespace mbar
