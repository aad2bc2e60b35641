#pragma once

#include <span>
#include <string>
#include <vector>

#include "ppm/generators.hpp"
#include "ppm/ode.hpp"
#include "ppm/types.hpp"

namespace ppm {

/// Tr(op rho_S) sampled along a trajectory.
struct Observable {
    std::string name;
    Matrix op;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Matrix> rho;
    /// values[k][i]: observable k at times[i].
    std::vector<std::vector<cplx>> values;
    OdeStats stats;
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    Vector final_state;
};

Trajectory evolve(const LinearGenerator& gen, const Matrix& rho_s0, std::span<const double> times,
                  const std::vector<Observable>& observables = {}, const OdeOptions& opts = {});

/// Evolves an arbitrary full state and samples Tr(measure * reduced(x(t))).
std::vector<cplx> propagate_and_measure(const LinearGenerator& gen, const Vector& x0, const Matrix& measure,
                                        std::span<const double> times, const OdeOptions& opts = {},
                                        OdeStats* stats = nullptr);

struct SteadyStateOptions {
    double eigen_tol = 1e-6;
    double agreement_tol = 1e-6;
    double derivative_tol = 1e-10;
    /// Run the integration path as well and demand agreement (otherwise only on eigen-path failure).
    bool cross_check = false;
    /// Above this dimension the sparse LU is skipped and only the integration path runs.
    std::size_t direct_max_dim = 40'000;
    /// Integration chunk length and give-up time for the fallback path.
    double chunk = 50.0;
    double max_time = 1e5;
    OdeOptions ode;
};

struct SteadyState {
    Vector state;
    Matrix rho_s;
    cplx eigenvalue = 0.0;
    std::string method;
    /// Max entrywise difference between the two paths when both ran.
    double path_difference = -1.0;
};

/// Normalized so that Tr reduced(state) = 1.
SteadyState steady_state(const LinearGenerator& gen, const SteadyStateOptions& opts = {});

/// Quantum regression: Tr(measure * reduced(e^{L tau} (apply * state))) on the tau grid.
std::vector<cplx> two_time_correlation(const LinearGenerator& gen, const Vector& state, const Matrix& apply,
                                       const Matrix& measure, std::span<const double> taus,
                                       const OdeOptions& opts = {});

struct SpectrumResult {
    std::vector<double> omega;
    std::vector<double> values;
    cplx offset;
    double residual = 0.0;
};

/// S(w) = Re int_0^tmax dtau e^{i w tau} (corr(tau) - offset), trapezoid rule on the given grid.
/// Throws SolverError when |corr(tmax) - offset| >= 1e-4 |corr(0)|.
SpectrumResult fluorescence_spectrum(std::span<const cplx> corr, std::span<const double> taus, cplx offset,
                                     std::span<const double> omega);

double von_neumann_entropy(const Matrix& rho);
cplx expectation(const Matrix& rho, const Matrix& op);

} // namespace ppm
