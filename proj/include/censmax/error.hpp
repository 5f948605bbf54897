#pragma once

#include <stdexcept>
#include <string>

namespace censmax {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto exit codes (config 2, data 3, numerical 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid distribution or model parameter (sigma <= 0, nu <= 0, p outside (0,1)).
class DomainError : public Error {
public:
    using Error::Error;
};

// Marginal transform requested at or beyond the support boundary.
class TransformDomainError : public DomainError {
public:
    using DomainError::DomainError;
};

// An observation lies strictly below the censoring threshold.
class CensoringError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

// Not enough uncensored observations to identify the margin.
class NonIdentifiableError : public DataError {
public:
    using DataError::DataError;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// Point-process simulation exceeded its safety cap.
class ResolutionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Monte-Carlo run produced fewer clusters than the requested return period needs.
class InsufficientSimulationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace censmax
