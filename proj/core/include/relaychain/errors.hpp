#pragma once

#include <stdexcept>
#include <string>

namespace relaychain {

/// Invalid construction arguments (out-of-range parameters, malformed topology).
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation of a quantity outside its mathematical domain, e.g. path loss
/// between coincident points under the singular law.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An adaptive integration could not reach its tolerance within budget.
/// The best available estimate is carried along.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best_estimate, double error_estimate)
        : std::runtime_error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double best_estimate_;
    double error_estimate_;
};

/// An alternating PGFL sum lost more accuracy to cancellation than the
/// configured budget allows.
class PrecisionError : public std::runtime_error {
public:
    PrecisionError(const std::string& what, double value, double error_bound)
        : std::runtime_error(what), value_(value), error_bound_(error_bound) {}

    double value() const noexcept { return value_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double value_;
    double error_bound_;
};

/// Requested computation exceeds a configured term budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range experiment configuration. Carries the line
/// number (0 when not tied to a line).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace relaychain
