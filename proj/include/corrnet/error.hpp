#pragma once

#include <stdexcept>
#include <string>

namespace corrnet {

/// Base of every error raised by the library. `kind()` selects the CLI exit code.
class Error : public std::runtime_error {
public:
    enum class Kind { Validation, Io, Numerical };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Malformed input text. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(Kind::Validation, line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(Kind::Validation, what) {}
};

/// A ticker does not sit on the shared trading-date grid.
class AlignmentError : public Error {
public:
    AlignmentError(const std::string& ticker, const std::string& what)
        : Error(Kind::Validation, ticker + ": " + what), ticker_(ticker) {}

    const std::string& ticker() const noexcept { return ticker_; }

private:
    std::string ticker_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(Kind::Io, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(Kind::Numerical, what) {}
};

/// Rethrows `e` as the same kind of error with `context` prepended.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context)
{
    const std::string what = context + ": " + e.what();
    switch (e.kind()) {
    case Error::Kind::Io:
        throw IoError(what);
    case Error::Kind::Numerical:
        throw NumericalError(what);
    case Error::Kind::Validation:
        break;
    }
    throw ValidationError(what);
}

} // namespace corrnet
