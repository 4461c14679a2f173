#pragma once

#include <stdexcept>
#include <string>

namespace stabsel {

/// Invalid argument or violated precondition.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Failure reading or parsing an input file. Messages carry row/column.
class IngestionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A regularization grid could not be constructed.
class GridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A requested error-rate target cannot be met by any admissible threshold.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, double minimal_bound)
        : std::runtime_error(what), minimal_bound_(minimal_bound) {}

    double minimal_bound() const noexcept { return minimal_bound_; }

private:
    double minimal_bound_;
};

} // namespace stabsel
