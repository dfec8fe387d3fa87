#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wghp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed coefficient expression; `offset` is the byte position of the failure.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class UnknownIdentifier : public ParseError {
public:
    UnknownIdentifier(const std::string& name, std::size_t offset)
        : ParseError("unknown identifier '" + name + "'", offset), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Evaluation outside the domain of a function (log of a non-positive value, x/0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class UnsupportedDerivative : public Error {
public:
    using Error::Error;
};

/// A modelling assumption (b > 0, r >= 0, r - eps2 b'/2 >= gamma > 0) is violated.
class AssumptionViolation : public Error {
public:
    using Error::Error;
};

class MeshError : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace wghp
