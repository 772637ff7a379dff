#pragma once

#include <stdexcept>
#include <string>

namespace censcorr {

// Base of every exception thrown by the library. `kind()` is a stable
// machine-readable tag used by the CLI error documents.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "error"; }
};

class InvalidArgument : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "invalid_argument"; }
};

class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
    const char* kind() const noexcept override { return "dimension_mismatch"; }
};

// Fewer usable observations than an estimator needs.
class InsufficientData : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "insufficient_data"; }
};

// Correlation with a zero-variance input.
class UndefinedCorrelation : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "undefined_correlation"; }
};

class DataError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "data_error"; }
};

}  // namespace censcorr
