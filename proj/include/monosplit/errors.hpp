#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace monosplit {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands of a vector operation do not have the same shape.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A convex set was declared with an empty or ill-ordered description.
class InvalidSetError : public Error {
public:
    using Error::Error;
};

/// Operator data violates a structural requirement (symmetry, dimension).
class InvalidOperatorError : public Error {
public:
    using Error::Error;
};

/// A constant (Lipschitz modulus, cocoercivity, slack parameter) is out of range.
class InvalidConstantError : public Error {
public:
    using Error::Error;
};

/// A problem description is inconsistent or violates a standing hypothesis.
class InvalidProblemError : public Error {
public:
    using Error::Error;
};

/// The requested stepsize lies outside the admissible range of the method.
class StepsizeError : public Error {
public:
    using Error::Error;
};

/// An iterate became non-finite. Carries the trace recorded up to that point.
template <class Trace>
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, Trace trace)
        : Error(what), trace_(std::move(trace)) {}

    const Trace& trace() const noexcept { return trace_; }

private:
    Trace trace_;
};

} // namespace monosplit
