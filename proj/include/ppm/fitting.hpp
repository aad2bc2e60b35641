#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "ppm/bath.hpp"
#include "ppm/types.hpp"

namespace ppm {

/// r(z) = sum_j z_j f_j / (z - x_j) / sum_j z_j / (z - x_j).
struct BarycentricRational {
    std::vector<double> support;
    std::vector<double> values;
    std::vector<cplx> weights;
    bool converged = false;
    double residual = 0.0; // max |S - r| over the samples

    int order() const { return static_cast<int>(support.size()); }
    cplx operator()(cplx z) const;
};

/// Greedy AAA. Stops once max residual <= tol * max|S| or order == max_order.
BarycentricRational aaa_fit(std::span<const double> omega, std::span<const double> values,
                            double tol, int max_order);

struct PoleResidue {
    cplx pole;
    cplx residue;
};

/// Finite eigenvalues of the arrowhead pencil, with residues n(p)/d'(p).
std::vector<PoleResidue> poles_residues(const BarycentricRational& r);

struct ExpTerm {
    cplx w;
    double nu = 0.0;
    double gamma = 0.0;
};

/// C(t >= 0) ~ sum_l w_l exp(-(i nu_l + gamma_l) t), C(-t) = conj C(t).
struct ExponentialDecomposition {
    std::vector<ExpTerm> terms;
    double sigma2 = 0.0;
    double eps_S = 0.0;
    double moment_mismatch = 0.0; // |sum w_l - sigma^2|
    bool moment_warning = false;

    int N() const { return static_cast<int>(terms.size()); }
    cplx weight_sum() const;
    cplx correlation(double t) const;
    /// Fourier transform int dt C(t) e^{i w t} of the reconstruction.
    double spectrum(double omega) const;
};

inline constexpr double kMomentWarnRelative = 1e-2;

/// Keeps lower-half-plane poles with |r_l| >= discard_threshold and -Im p_l > min_gamma;
/// w = -i r, nu = Re p, gamma = -Im p.
ExponentialDecomposition to_exponential_decomposition(std::span<const PoleResidue> pr, double sigma2,
                                                      double discard_threshold, double min_gamma = 0.0);

struct DecompositionErrors {
    double eps_S = 0.0;
    std::vector<double> eps_C;
};

/// eps_S = trapezoid int |S - S_fit| over omega_grid; eps_C(t) = |C(t) - C_fit(t)|.
DecompositionErrors decomposition_errors(const ExponentialDecomposition& d, const BathSpec& bath,
                                         std::span<const double> t_grid,
                                         std::span<const double> omega_grid);

struct FitOptions {
    // An empty window (omega_max <= omega_min) selects default_fit_window(bath).
    double omega_min = 0.0;
    double omega_max = 0.0;
    int samples = 4001;
    double tol = 1e-12;
    int max_order = 40;
    /// If > 0, the AAA order is raised one step at a time until exactly this many terms survive.
    int n_terms = 0;
};

struct FitResult {
    ExponentialDecomposition decomposition;
    BarycentricRational rational;
    std::vector<double> omega;
    std::vector<double> spectrum;
    double spectrum_l1 = 0.0; // trapezoid int |S|
};

/// +-16 w_b for SuperOhmic, +-max tabulated w, nu +- 200 gamma for SingleMode.
std::pair<double, double> default_fit_window(const BathSpec& bath);

/// Samples S(w) on a uniform grid, fits it and converts to a decomposition with sigma^2 from the bath.
FitResult fit_bath(const BathSpec& bath, const FitOptions& opts);

double trapezoid(std::span<const double> x, std::span<const double> y);

nlohmann::json to_json(const ExponentialDecomposition& d);
ExponentialDecomposition decomposition_from_json(const nlohmann::json& j);

} // namespace ppm
