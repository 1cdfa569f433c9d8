#pragma once

#include <stdexcept>
#include <string>
#include <cstdint>
#include <utility>

namespace forge {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input text could not be parsed. `raw()` keeps the offending input for audit.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::string raw = {})
        : Error(what), raw_(std::move(raw)) {}
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

/// Referential or structural inconsistency in data (dangling ids, duplicates, gaps).
class IntegrityError : public Error {
public:
    using Error::Error;
};

class InfeasibleError : public Error {
public:
    using Error::Error;
};

class DegenerateError : public Error {
public:
    using Error::Error;
};

/// A pipeline stage was requested before one of its upstream stages.
class DependencyError : public Error {
public:
    DependencyError(const std::string& what, std::string stage)
        : Error(what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

class CorruptionError : public Error {
public:
    using Error::Error;
};

/// Optimistic-versioning failure: the caller's base version is stale.
class ConflictError : public Error {
public:
    ConflictError(const std::string& what, std::uint64_t current)
        : Error(what), current_(current) {}
    std::uint64_t current_version() const noexcept { return current_; }

private:
    std::uint64_t current_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace forge
