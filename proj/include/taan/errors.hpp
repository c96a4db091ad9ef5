#pragma once

#include <stdexcept>
#include <string>

namespace taan {

/// Input that violates a value precondition (non-finite, out of range).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Mismatched vector or matrix dimensions.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to converge or produced an impossible value.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An APL function whose weighted norm is (numerically) zero.
class DegenerateFunctionError : public NumericError {
public:
    using NumericError::NumericError;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, long line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

class EmptyDatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace taan
