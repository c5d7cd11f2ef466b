#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vimu {

// Error classes map one-to-one onto the CLI exit codes.
enum class ErrorKind { config = 2, format = 3, numerical = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Bad parameters, violated preconditions, unknown names.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

// Unreadable or malformed files, and invariant violations found while loading.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(ErrorKind::format, what) {}
    FormatError(const std::string& what, std::size_t line);

    // 1-based source line, 0 when not applicable.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_ = 0;
};

// Non-finite values, divergence, aliased rotations.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

}  // namespace vimu
