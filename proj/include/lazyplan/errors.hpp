#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lazyplan {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class GenerationFailed : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// No world in a finite set agrees with the observed history.
class EmptyConsistentSet : public Error {
public:
    using Error::Error;
};

class NoUnevaluatedEdge : public Error {
public:
    using Error::Error;
};

class InvalidOracle : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace lazyplan
