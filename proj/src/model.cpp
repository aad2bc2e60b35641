#include "ppm/model.hpp"

#include <cmath>

namespace ppm {

CouplingPolynomial::CouplingPolynomial(std::vector<double> coeffs) : alpha_(std::move(coeffs))
{
    for (double c : alpha_)
        if (!std::isfinite(c))
            throw ValidationError("coupling polynomial: coefficients must be finite");
    while (!alpha_.empty() && alpha_.back() == 0.0)
        alpha_.pop_back();
    if (alpha_.empty())
        throw ValidationError("coupling polynomial: at least one nonzero alpha_n is required");
}

double CouplingPolynomial::operator[](int n) const
{
    if (n < 1 || n > degree())
        return 0.0;
    return alpha_[static_cast<std::size_t>(n - 1)];
}

namespace {

void require_hermitian(const Matrix& m, const char* what)
{
    if (m.rows() != m.cols())
        throw ValidationError(std::string(what) + " must be square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ValidationError(std::string(what) + " must be Hermitian");
}

} // namespace

void SystemSpec::validate() const
{
    if (hamiltonian.rows() == 0)
        throw ValidationError("system: empty Hamiltonian");
    require_hermitian(hamiltonian, "system Hamiltonian");
    require_hermitian(coupling, "system coupling operator s");
    require_hermitian(rho0, "initial state");
    const auto n = hamiltonian.rows();
    if (coupling.rows() != n || rho0.rows() != n)
        throw ValidationError("system: H_S, s and rho_S(0) must have the same dimension");
    for (std::size_t k = 0; k < collapses.size(); ++k) {
        if (collapses[k].op.rows() != n || collapses[k].op.cols() != n)
            throw ValidationError("system: collapse operator " + std::to_string(k) + " has the wrong dimension");
        if (!(collapses[k].rate >= 0.0))
            throw ValidationError("system: collapse rate " + std::to_string(k) + " must be >= 0");
    }
    if (std::abs(rho0.trace() - 1.0) > 1e-10)
        throw ValidationError("system: initial state must have unit trace");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho0);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw ValidationError("system: initial state is not positive semidefinite");
}

SystemSpec two_level_atom(double omega_s)
{
    SystemSpec sys;
    sys.hamiltonian = Matrix::Zero(2, 2);
    sys.hamiltonian(0, 0) = 0.5 * omega_s;
    sys.hamiltonian(1, 1) = -0.5 * omega_s;
    sys.coupling = Matrix::Zero(2, 2);
    sys.coupling(0, 1) = 1.0;
    sys.coupling(1, 0) = 1.0;
    sys.rho0 = Matrix::Zero(2, 2);
    sys.rho0(0, 0) = 1.0;
    return sys;
}

int PseudomodeSet::family_size() const
{
    return kind == Kind::Purified ? static_cast<int>(purified.size())
                                  : static_cast<int>(finite_a.size() - 1) / 2;
}

int PseudomodeSet::mode_count() const
{
    return kind == Kind::Purified ? 2 * static_cast<int>(purified.size()) : static_cast<int>(finite_a.size());
}

cplx PseudomodeSet::lambda_square_sum(int sign) const
{
    cplx s = 0.0;
    if (kind == Kind::Purified) {
        for (const auto& m : purified)
            s += sign > 0 ? m.lambda_plus * m.lambda_plus : m.lambda_minus * m.lambda_minus;
    } else {
        for (const auto& m : finite_a)
            s += m.lambda * m.lambda;
    }
    return s;
}

void PseudomodeSet::flip_sign(int l)
{
    if (kind == Kind::Purified) {
        auto& m = purified.at(static_cast<std::size_t>(l));
        m.lambda_plus = -m.lambda_plus;
        m.lambda_minus = -m.lambda_minus;
    } else {
        const int n = family_size();
        if (l < 0 || l >= n)
            throw ValidationError("flip_sign: mode index out of range");
        finite_a[static_cast<std::size_t>(l)].lambda *= -1.0;
        finite_a[static_cast<std::size_t>(l + n)].lambda *= -1.0;
    }
}

cplx PseudomodeSet::correlation(double t) const
{
    if (kind != Kind::FiniteA)
        throw ValidationError("correlation: only defined for the finite-a mode set");
    cplx c = 0.0;
    for (const auto& m : finite_a)
        c += m.lambda * m.lambda * std::exp(-I * m.omega * t - m.gamma * std::abs(t));
    return c;
}

PseudomodeSet build_purified_modes(const ExponentialDecomposition& d)
{
    PseudomodeSet out;
    out.kind = PseudomodeSet::Kind::Purified;
    out.sigma2 = d.sigma2;
    for (std::size_t l = 0; l < d.terms.size(); ++l) {
        const auto& t = d.terms[l];
        if (!(t.gamma > 0.0))
            throw ValidationError("purified modes: term " + std::to_string(l) + " has gamma <= 0");
        if (t.w == cplx(0.0)) {
            out.warnings.push_back("term " + std::to_string(l) + " has w = 0 and was dropped");
            continue;
        }
        const cplx lp = std::sqrt(t.w);
        out.purified.push_back({t.nu, t.gamma, lp, std::conj(lp)});
    }
    if (out.purified.empty())
        throw ValidationError("purified modes: every term has zero weight");
    return out;
}

PseudomodeSet build_finite_a_modes(const ExponentialDecomposition& d, double a)
{
    if (!(a > 0.0))
        throw ValidationError("finite-a modes: a must be positive");
    PseudomodeSet out;
    out.kind = PseudomodeSet::Kind::FiniteA;
    out.a = a;
    out.sigma2 = d.sigma2;
    std::vector<FiniteAMode> minus;
    for (const auto& t : d.terms) {
        const cplx lp = std::sqrt(t.w);
        out.finite_a.push_back({cplx(t.nu, a), cplx(t.gamma + a), lp});
        minus.push_back({cplx(t.nu, -a), cplx(t.gamma + a), std::conj(lp)});
    }
    out.finite_a.insert(out.finite_a.end(), minus.begin(), minus.end());
    out.finite_a.push_back({0.0, a, I * std::sqrt(d.sigma2)});
    return out;
}

ExponentialDecomposition single_mode_decomposition(double lambda, double nu, double gamma)
{
    ExponentialDecomposition d;
    d.terms.push_back({cplx(lambda * lambda), nu, gamma});
    d.sigma2 = lambda * lambda;
    return d;
}

nlohmann::json to_json(const PseudomodeSet& m)
{
    auto c = [](cplx z) { return nlohmann::json::array({z.real(), z.imag()}); };
    nlohmann::json modes = nlohmann::json::array();
    if (m.kind == PseudomodeSet::Kind::Purified) {
        for (const auto& p : m.purified)
            modes.push_back({{"nu", p.nu}, {"gamma", p.gamma}, {"lambda_plus", c(p.lambda_plus)},
                             {"lambda_minus", c(p.lambda_minus)}});
    } else {
        for (const auto& p : m.finite_a)
            modes.push_back({{"omega", c(p.omega)}, {"gamma", c(p.gamma)}, {"lambda", c(p.lambda)}});
    }
    return {{"kind", m.kind == PseudomodeSet::Kind::Purified ? "purified" : "finite_a"},
            {"a", m.a},
            {"sigma2", m.sigma2},
            {"modes", modes}};
}

} // namespace ppm
