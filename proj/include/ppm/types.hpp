#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace ppm {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Triplet = Eigen::Triplet<cplx>;

inline constexpr cplx I{0.0, 1.0};

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed scenario, inconsistent dimensions, out-of-range parameters.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical failure inside a solver (integrator, eigen-solver, linear solve).
class SolverError : public Error {
public:
    using Error::Error;
};

/// Internal consistency violation, e.g. a second moment with a large imaginary part.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double achieved)
        : Error(what), achieved_error(achieved) {}
    double achieved_error;
};

} // namespace ppm
