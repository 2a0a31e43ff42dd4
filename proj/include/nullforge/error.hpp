#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nullforge {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on the mathematical input failed (non-separable transform,
/// zero divisor, formula outside its validity range, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Shapes of operands do not fit together.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Malformed transform-function source text.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t position, std::string expected)
        : Error(message + " at position " + std::to_string(position) +
                (expected.empty() ? std::string{} : " (expected " + expected + ")")),
          position_(position), expected_(std::move(expected)) {}

    std::size_t position() const noexcept { return position_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::string expected_;
};

/// Evaluation of g(i,j) at a specific grid point failed or produced a value
/// that cannot be used (non-finite, zero divisor, inexact in the rational domain).
class EvalError : public DomainError {
public:
    EvalError(const std::string& message, long i, long j)
        : DomainError(message + " at (i,j)=(" + std::to_string(i) + "," + std::to_string(j) + ")"),
          i_(i), j_(j) {}

    long i() const noexcept { return i_; }
    long j() const noexcept { return j_; }

private:
    long i_;
    long j_;
};

/// A serialized document does not match its schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

} // namespace nullforge
