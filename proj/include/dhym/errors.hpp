#pragma once

#include <stdexcept>
#include <string>

namespace dhym {

/// Invalid input: a precondition on arguments or configuration was violated.
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// A function was evaluated outside its domain (for example a zero eigenvalue).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// The configuration sits on an asymptote of a level set (vanishing denominator).
class SingularError : public std::runtime_error {
public:
    explicit SingularError(const std::string& what) : std::runtime_error(what) {}
};

/// The requested root does not lie in the component containing the large-diagonal regime.
class NoSolutionError : public std::runtime_error {
public:
    explicit NoSolutionError(const std::string& what) : std::runtime_error(what) {}
};

/// A mathematical precondition failed on valid input (region test, cone check, search failure).
class RefusalError : public std::runtime_error {
public:
    explicit RefusalError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver did not reach its tolerance.
class NonConvergenceError : public std::runtime_error {
public:
    explicit NonConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dhym
