#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace newsprop {

// Base error. `code` is a stable machine-readable identifier (e.g. "SelfLoop",
// "ShapeMismatch"); `what()` is "<code>: <detail>".
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Bad command line or configuration. CLI exit code 1.
class UsageError : public Error {
public:
    using Error::Error;
};

// Invalid input data: malformed files, broken graph invariants, shape
// mismatches. CLI exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

// A verification check failed (gradient check, oracle disagreement).
// CLI exit code 3.
class CheckError : public Error {
public:
    using Error::Error;
};

// NaN/Inf reached a tensor that must stay finite.
class NumericError : public DataError {
public:
    using DataError::DataError;
};

} // namespace newsprop
