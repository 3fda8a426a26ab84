#pragma once

#include <stdexcept>
#include <string>

namespace stllab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input values (bad plate, wrong widths, malformed config).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Input outside the mathematical domain of an operation (e.g. grazing incidence).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed file content; the message carries line/field diagnostics.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Inconsistent configuration (empty band, bad truncation, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: non-convergence, factorization failure, divergence.
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace stllab
