#pragma once

#include <stdexcept>
#include <string>

namespace pbench {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller-supplied value violates an operation's precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A configuration value (vocabulary entry, fixture key, measure name, ...)
/// is missing or inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A text input (lexicon file, config file, script) failed to parse.
/// Carries the 1-based line number when known (0 = unknown).
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

/// Design matrix is rank deficient (factorial cells missing).
class SingularDesignError : public Error {
public:
    using Error::Error;
};

/// Response variable carries no variation; nothing to fit.
class DegenerateResponseError : public Error {
public:
    using Error::Error;
};

/// Too few observations for the requested estimate.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// A grouped operation produced no usable result at all.
class EmptyResultError : public Error {
public:
    using Error::Error;
};

/// Transport or protocol failure talking to a chat backend.
class BackendError : public Error {
public:
    explicit BackendError(const std::string& what, int status = 0)
        : Error(what), status_(status) {}

    /// HTTP status when applicable, 0 for transport-level failures.
    int status() const { return status_; }

private:
    int status_;
};

/// A report cell cannot be rendered from the supplied fits.
class ReportError : public Error {
public:
    using Error::Error;
};

}  // namespace pbench
