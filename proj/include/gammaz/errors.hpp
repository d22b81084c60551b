#pragma once

#include <stdexcept>
#include <string>

namespace gammaz {

/// Malformed expression text; carries a 0-based character position.
class SyntaxError : public std::runtime_error {
public:
    SyntaxError(std::size_t pos, const std::string& what)
        : std::runtime_error("syntax error at position " + std::to_string(pos) + ": " + what),
          position(pos) {}
    std::size_t position;
};

/// A free identifier that is neither a coordinate, a bound parameter, nor a function.
class UnknownIdentifier : public std::runtime_error {
public:
    explicit UnknownIdentifier(const std::string& name)
        : std::runtime_error("unknown identifier '" + name + "'"), identifier(name) {}
    std::string identifier;
};

/// Evaluation hit log/sqrt of a nonpositive value, division by zero, or a
/// fractional power of a nonpositive base.
class DomainError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The completing-square system of the z-Bochner decomposition has no solution
/// at the requested point (residual above tolerance).
class AssumptionUnsatisfied : public std::runtime_error {
public:
    AssumptionUnsatisfied(double res, double tol)
        : std::runtime_error("shift-vector system unsatisfied: residual " + std::to_string(res) +
                             " > tol " + std::to_string(tol)),
          residual(res) {}
    double residual;
};

/// The combined frame [a | z] is singular at the evaluation point.
class SingularFrame : public std::runtime_error {
public:
    explicit SingularFrame(double det)
        : std::runtime_error("frame [a|z] singular: |det| = " + std::to_string(det)), determinant(det) {}
    double determinant;
};

/// Curvature constant is not positive; log-Sobolev/decay bounds do not apply.
class NonpositiveKappa : public std::runtime_error {
public:
    explicit NonpositiveKappa(double k)
        : std::runtime_error("kappa = " + std::to_string(k) + " is not positive"), kappa(k) {}
    double kappa;
};

/// A density evolution produced a non-finite cell value.
class Unstable : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Initial density has nonpositive cells or zero mass.
class BadInitial : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Configuration / input file problems (maps to CLI exit code 2).
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gammaz
