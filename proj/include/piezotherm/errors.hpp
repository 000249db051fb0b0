#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace piezotherm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Zero (or numerically vanishing) pivot met during elimination.
class SingularPivot : public Error {
public:
    SingularPivot(std::size_t row, const std::string& what)
        : Error(what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// Time stepping produced a nonfinite state or a failed linear solve.
class SolverFailure : public Error {
public:
    SolverFailure(std::size_t step, const std::string& what)
        : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace piezotherm
