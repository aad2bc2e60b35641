#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "ppm/bath.hpp"
#include "ppm/fitting.hpp"
#include "ppm/generators.hpp"
#include "ppm/solver.hpp"

namespace ppm::bench {

/// Runs fn(0..n-1) on up to `threads` workers; the first exception is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

std::vector<double> linspace(double a, double b, int points);

/// Projector on |e> (index 0), i.e. sigma_+ sigma_- in the |e> = 0 convention.
Matrix excited_projector();
Matrix sigma_plus();
Matrix sigma_minus();

// Two-level atom in a lossy cavity.
SystemSpec lossy_cavity_system();
SingleMode lossy_cavity_mode();
inline constexpr std::array<std::array<double, 3>, 4> kCavityCombos{
    {{1.0, 0.0, 0.0}, {1.0, 0.4, 0.0}, {1.0, 0.0, 0.15}, {1.0, 0.0, -0.15}}};

struct CavityOptions {
    int cap = 12;
    int cavity_cap = 40;
    double t_end = 50.0;
    int points = 501;
    OdeOptions ode;
};

struct CavityComparison {
    std::array<double, 3> alpha{};
    std::vector<double> times;
    std::vector<double> population_ppm, population_exact, entropy_ppm, entropy_exact;
    double population_error = 0.0;
    double entropy_error = 0.0;
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    bool unstable = false;
};

CavityComparison compare_with_cavity(const std::array<double, 3>& alpha, const CavityOptions& opts = {});

struct SteadyPoint {
    double alpha2 = 0.0;
    double alpha3 = 0.0;
    double population = NAN;
    double entropy = NAN;
    std::string status = "ok";
};

/// Steady <sigma+ sigma-> and S_vN of the cavity model over an (alpha2, alpha3) grid with alpha1 = 1.
std::vector<SteadyPoint> steady_grid(std::span<const double> alpha2, std::span<const double> alpha3, int cap,
                                     int threads = 1);

// Resonantly driven quantum dot with phonons (model units rad/ps, time in ps).
SystemSpec quantum_dot_system(double rabi, double kappa);
BathSpec quantum_dot_phonons();

/// 15 / (smallest positive decay rate among the collapse rates and mode damping rates).
double default_tau_max(const SystemSpec& sys, const PseudomodeSet* modes);

struct SpectrumOptions {
    double tau_max = 0.0; // <= 0: default_tau_max
    int tau_points = 2048;
    std::vector<double> omega;
    OdeOptions ode;
    SteadyStateOptions steady;
};

struct SpectrumRun {
    SteadyState steady;
    std::vector<double> tau;
    std::vector<cplx> corr;
    SpectrumResult spectrum;
};

/// S(w) of <measure(tau) apply> with the long-time product <measure><apply> subtracted.
SpectrumRun emission_spectrum(const LinearGenerator& gen, const Matrix& apply, const Matrix& measure,
                              double tau_max, const SpectrumOptions& opts);

std::vector<std::size_t> local_maxima(std::span<const double> values);

struct MollowOptions {
    double rabi_mev = 1.0;
    double kappa_mev = 0.1;
    int cap = 3;
    double omega_span_mev = 3.0;
    double omega_step_mev = 0.01;
    FitOptions fit;
    OdeOptions ode;
};

struct MollowReport {
    ExponentialDecomposition decomposition;
    std::vector<double> omega_mev;
    std::vector<double> bare, phonon;
    std::array<double, 3> bare_peaks_mev{NAN, NAN, NAN}; // nearest maxima to -rabi, 0, +rabi
    bool triplet = false;
    double sideband_minus = NAN, sideband_plus = NAN; // phonon spectrum at its sideband maxima
    double bath_asymmetry = NAN;                      // S(rabi) - S(-rabi)
    bool asymmetry_matches = false;
};

MollowReport run_mollow(const MollowOptions& opts = {});

} // namespace ppm::bench
