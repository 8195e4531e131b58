#ifndef CODESEER_ERROR_HPP
#define CODESEER_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace codeseer {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed source text: unterminated block comment, string or char literal.
class StandardizationError : public Error {
public:
    StandardizationError(std::string file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), file_(std::move(file)), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// Token id or index outside the valid range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Non-finite value detected in inputs, parameters or gradients.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Corrupt, truncated or mismatched binary/text artifact.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Input data violates a precondition (empty corpus, overlapping splits, ...).
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace codeseer

#endif  // CODESEER_ERROR_HPP
