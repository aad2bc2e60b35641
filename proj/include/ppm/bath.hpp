#pragma once

#include <filesystem>
#include <limits>
#include <memory>
#include <variant>
#include <vector>

#include "ppm/types.hpp"

namespace ppm {

/// J(w) = alpha_p * w^3 * exp(-w^2 / (2 w_b^2)).
struct SuperOhmic {
    double alpha_p = 0.0; // time^2
    double omega_b = 1.0; // 1/time
};

/// A single damped mode: C(t) = lambda^2 exp(-i nu t - gamma |t|), independent of temperature.
struct SingleMode {
    double lambda = 0.0;
    double nu = 0.0;
    double gamma = 1.0;
};

/// Sampled J(w) on w >= 0, monotone cubic (PCHIP) interpolation, zero outside the grid.
class Tabulated {
public:
    Tabulated(std::vector<double> omega, std::vector<double> density);

    /// Two columns (w, J), comma or whitespace separated; a non-numeric first line is a header.
    static Tabulated from_csv(const std::filesystem::path& path);

    double operator()(double omega) const;
    double slope_at_zero() const;
    double max_omega() const { return omega_.back(); }
    const std::vector<double>& omega() const { return omega_; }
    const std::vector<double>& density() const { return density_; }

private:
    struct Spline;
    std::vector<double> omega_;
    std::vector<double> density_;
    std::shared_ptr<const Spline> spline_;
};

using SpectralDensity = std::variant<SuperOhmic, SingleMode, Tabulated>;

struct BathSpec {
    SpectralDensity density;
    double beta = std::numeric_limits<double>::infinity(); // +inf: zero temperature

    bool zero_temperature() const { return beta == std::numeric_limits<double>::infinity(); }
    void validate() const;
};

struct QuadratureOptions {
    double rel_tol = 1e-10;
    std::size_t max_subdivisions = 4000;
};

/// J(w) for w >= 0 (zero for w < 0). Not defined for SingleMode.
double spectral_density(const SpectralDensity& density, double omega);

/// Upper integration limit: J(w_max)/max J < 1e-12 for SuperOhmic, last grid point for Tabulated.
double integration_cutoff(const SpectralDensity& density);

/// C(t) = int_0^inf dw J(w)/pi [coth(beta w/2) cos(w t) - i sin(w t)]; closed form for SingleMode.
cplx eval_correlation(const BathSpec& bath, double t, const QuadratureOptions& opts = {});

/// S(w) = (1 + coth(beta w/2)) [J(w) theta(w) - J(-w) theta(-w)], the Fourier transform
/// int dt C(t) e^{i w t}. SingleMode returns its Lorentzian 2 lambda^2 gamma / ((w-nu)^2 + gamma^2).
double eval_power_spectrum(const BathSpec& bath, double omega);

/// sigma^2 = C(0).
double second_moment(const BathSpec& bath, const QuadratureOptions& opts = {});

} // namespace ppm
