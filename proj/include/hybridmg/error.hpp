#pragma once

#include <stdexcept>
#include <string>

namespace hybridmg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input (mesh files, experiment configs). Carries the line number.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Inconsistent mesh connectivity or agglomeration.
class TopologyError : public Error {
public:
    using Error::Error;
};

/// Invalid combination of user options.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Singular local block, zero pivot and similar numerical failures.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace hybridmg
