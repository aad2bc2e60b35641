#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ppm/fitting.hpp"
#include "ppm/types.hpp"

namespace ppm {

/// Q(X) = sum_{n>=1} alpha_n X^n. Trailing zero coefficients are trimmed.
class CouplingPolynomial {
public:
    CouplingPolynomial() = default;
    /// coeffs[0] is alpha_1.
    explicit CouplingPolynomial(std::vector<double> coeffs);

    int degree() const { return static_cast<int>(alpha_.size()); }
    /// alpha_n for n >= 1; zero above the degree.
    double operator[](int n) const;
    const std::vector<double>& coefficients() const { return alpha_; }

private:
    std::vector<double> alpha_;
};

/// rate * (2 L rho L^dag - L^dag L rho - rho L^dag L).
struct Collapse {
    Matrix op;
    double rate = 0.0;
};

struct SystemSpec {
    Matrix hamiltonian;
    Matrix coupling; // s
    std::vector<Collapse> collapses;
    Matrix rho0;

    int dim() const { return static_cast<int>(hamiltonian.rows()); }
    void validate() const;
};

/// H_S = (w_S/2) sigma_z, s = sigma_x, rho_S(0) = |e><e| with |e> = index 0.
SystemSpec two_level_atom(double omega_s);

struct PurifiedMode {
    double nu = 0.0;
    double gamma = 0.0;
    cplx lambda_plus;
    cplx lambda_minus;
};

struct FiniteAMode {
    cplx omega;
    cplx gamma;
    cplx lambda;
};

/// Purified: 2N modes ordered (1+..N+, 1-..N-). FiniteA: the same 2N followed by the zero-frequency mode.
struct PseudomodeSet {
    enum class Kind { Purified, FiniteA };

    Kind kind = Kind::Purified;
    double a = 0.0;
    double sigma2 = 0.0;
    std::vector<PurifiedMode> purified;
    std::vector<FiniteAMode> finite_a;
    std::vector<std::string> warnings;

    int family_size() const;
    int mode_count() const;
    /// sum_l lambda_{l+}^2 and sum_l lambda_{l-}^2 (purified), or sum over all modes of lambda^2 (finite-a).
    cplx lambda_square_sum(int sign) const;
    /// lambda_{l+} -> -lambda_{l+}, lambda_{l-} -> -lambda_{l-}.
    void flip_sign(int l);
    /// C_pm(t) = sum lambda^2 exp(-i Omega t - Gamma |t|); finite-a only.
    cplx correlation(double t) const;
};

PseudomodeSet build_purified_modes(const ExponentialDecomposition& d);
PseudomodeSet build_finite_a_modes(const ExponentialDecomposition& d, double a);

/// Single exact term (w = lambda^2, nu, gamma) with sigma^2 = lambda^2.
ExponentialDecomposition single_mode_decomposition(double lambda, double nu, double gamma);

nlohmann::json to_json(const PseudomodeSet& m);

} // namespace ppm
