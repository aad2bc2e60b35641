#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>

#include "ppm/types.hpp"

namespace ppm {

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    std::size_t max_steps = 50'000'000;
    /// Abort when max|y| exceeds blowup * max|y(0)|.
    double blowup = 1e3;
    double h_max = std::numeric_limits<double>::infinity();
};

struct OdeStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
    bool unstable = false;
    /// Number of grid points delivered before stopping.
    std::size_t delivered = 0;
};

/// y' = f(y); f writes into its second argument.
using Rhs = std::function<void(const Vector&, Vector&)>;
/// Receives the grid index and the state at that grid point.
using GridSink = std::function<void(std::size_t, const Vector&)>;

/// Dormand-Prince 5(4) with dense output. Grid must be non-decreasing and start at or after t0 = grid[0].
/// Throws SolverError on step-size underflow or when max_steps is exhausted.
OdeStats integrate_dopri5(const Rhs& f, Vector y, std::span<const double> grid, const GridSink& sink,
                          const OdeOptions& opts = {});

} // namespace ppm
