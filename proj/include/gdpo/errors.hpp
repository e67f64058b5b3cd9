#pragma once

#include <stdexcept>
#include <string>

namespace gdpo {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an input value is out of domain (non-finite, empty, wrong range).
class InvalidInputError : public Error {
public:
    explicit InvalidInputError(const std::string& what) : Error(what) {}
};

/// Raised on dimension mismatches between matrices, weights, or batches.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error(what) {}
};

/// Raised when an enumeration would exceed its combination budget.
/// Carries the computed combination count so callers can report it.
class BudgetError : public Error {
public:
    BudgetError(const std::string& what, unsigned long long computed_count)
        : Error(what), count(computed_count) {}
    unsigned long long count;
};

/// Raised when a data or config file does not match its schema.
/// `path` points at the offending JSON location, e.g. "$[2].rewards[0][1]".
class SchemaError : public Error {
public:
    SchemaError(const std::string& path_, const std::string& what)
        : Error(path_ + ": " + what), path(path_) {}
    std::string path;
};

/// Raised when a simulation step produces a non-finite gradient or state.
class SimulationError : public Error {
public:
    explicit SimulationError(const std::string& what) : Error(what) {}
};

}  // namespace gdpo
