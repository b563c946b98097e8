#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tca {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input row; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateRecordError : public Error {
public:
    using Error::Error;
};

class OrderingError : public Error {
public:
    using Error::Error;
};

class SpecError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class InsufficientHistoryError : public Error {
public:
    using Error::Error;
};

class UndefinedError : public Error {
public:
    using Error::Error;
};

class GroupSizeError : public Error {
public:
    using Error::Error;
};

}  // namespace tca
