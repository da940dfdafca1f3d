#pragma once

#include <stdexcept>
#include <string>

namespace nipp {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller violated an operation precondition (bad coordinates, k too large, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Malformed or out-of-range configuration text. Carries the offending line (1-based, 0 if global).
class ConfigError : public Error {
public:
    ConfigError(int line, const std::string& message)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Map bundle rejected by the loader; `kind` distinguishes the diagnostics.
class BundleError : public IoError {
public:
    enum class Kind { MissingFile, BadHeader, DimensionMismatch, NotCellAligned, UnknownLabel, BadMetadata };

    BundleError(Kind kind, const std::string& message) : IoError(message), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// An internal invariant failed. Indicates a bug, never bad input.
class InvariantError : public Error {
public:
    using Error::Error;
};

}  // namespace nipp
