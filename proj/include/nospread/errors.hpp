#pragma once

#include <stdexcept>
#include <string>

namespace nospread {

/// Bad argument shape: empty sizes, reversed intervals, mismatched grids.
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Evaluation at a point where the requested solution is unbounded (Y0 / ln r on the axis).
class SingularityError : public DomainError {
public:
    explicit SingularityError(const std::string& what) : DomainError(what) {}
};

/// The admissible spectral window [0, q_max] has zero length.
class DegenerateSpectrumError : public DomainError {
public:
    explicit DegenerateSpectrumError(const std::string& what) : DomainError(what) {}
};

/// Finite-difference stencil would leave the r >= 0 half plane.
class GeometryError : public ArgumentError {
public:
    explicit GeometryError(const std::string& what) : ArgumentError(what) {}
};

/// Inputs whose norm vanishes where a normalized quantity is requested.
class DegenerateInputError : public DomainError {
public:
    explicit DegenerateInputError(const std::string& what) : DomainError(what) {}
};

/// Propagator settings that break the padded-box invariant.
class ConfigurationError : public std::runtime_error {
public:
    explicit ConfigurationError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical result came out non-finite or otherwise unusable.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nospread
