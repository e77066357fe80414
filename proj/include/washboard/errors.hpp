#ifndef WASHBOARD_ERRORS_HPP
#define WASHBOARD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace washboard {

/// Base class for all library-specific failures.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user-supplied parameters (non-positive scales, bad grids, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

/// Derivative requested where none exists (breakpoint hit or family has none).
class NonDifferentiableError : public Error {
public:
    explicit NonDifferentiableError(const std::string& what) : Error(what) {}
};

/// A large-force or smoothness-only operation was applied to a non-smooth potential.
class AsymptoteInapplicableError : public Error {
public:
    explicit AsymptoteInapplicableError(const std::string& what) : Error(what) {}
};

/// Exponent spread of an integrand exceeds what double precision can represent.
class DynamicRangeError : public Error {
public:
    explicit DynamicRangeError(const std::string& what) : Error(what) {}
};

/// Grid refinement hit max_refinements before reaching rel_tol.
/// Carries the last two values of the refinement ladder.
class NotConvergedError : public Error {
public:
    NotConvergedError(const std::string& what, double previous, double last)
        : Error(what), previous_value(previous), last_value(last) {}
    double previous_value;
    double last_value;
};

/// Two algebraically equal routes to the same quantity disagreed beyond
/// tolerance; signals a quadrature misconfiguration, not a user error.
class InternalConsistencyError : public Error {
public:
    explicit InternalConsistencyError(const std::string& what) : Error(what) {}
};

/// Time-stepping state turned non-finite.
class BlowUpError : public Error {
public:
    BlowUpError(const std::string& what, long step) : Error(what), step_index(step) {}
    long step_index;
};

} // namespace washboard

#endif
