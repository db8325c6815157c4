#pragma once

#include <stdexcept>
#include <string>

namespace ouprocure {

/// Bad index ordering, dimension mismatch, malformed input.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Matrix is not a valid correlation matrix (e.g. not PSD within tolerance).
class NumericDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Conditioning on a variable that is perfectly correlated with another.
class SingularConditioningError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Conditioning event has (numerically) zero probability.
class DegenerateConditioningError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Threshold search failed (no bracket, iteration cap).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Grid oracle could not locate a threshold on its grid.
class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration could not be loaded or failed validation.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ouprocure
