#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ppm/benchmarks.hpp"
#include "ppm/ode.hpp"
#include "ppm/solver.hpp"

using namespace ppm;

namespace {

// Truncated oscillator H = w a^dag a, collapse a at rate k: <a(tau) a^dag(0)> = exp(-(i w + k) tau) in vacuum.
SystemSpec damped_oscillator(int n, double w, double k)
{
    Matrix a = Matrix::Zero(n, n);
    for (int j = 1; j < n; ++j)
        a(j - 1, j) = std::sqrt(double(j));
    SystemSpec s;
    s.hamiltonian = w * a.adjoint() * a;
    s.coupling = Matrix::Zero(n, n);
    s.collapses.push_back({a, k});
    s.rho0 = Matrix::Zero(n, n);
    s.rho0(0, 0) = 1.0;
    return s;
}

std::vector<double> grid(double end, int n)
{
    std::vector<double> t;
    for (int k = 0; k <= n; ++k)
        t.push_back(end * k / n);
    return t;
}

} // namespace

TEST_CASE("DOPRI5 reproduces complex exponentials on the output grid")
{
    const cplx lam(-0.3, 2.0);
    Vector y(2);
    y << 1.0, cplx(0.0, 1.0);
    const Vector y0 = y;
    const auto t = grid(8.0, 33);
    std::vector<Vector> out(t.size());
    const auto stats = integrate_dopri5([&](const Vector& x, Vector& dx) { dx = lam * x; }, y, t,
                                        [&](std::size_t i, const Vector& x) { out[i] = x; }, {1e-11, 1e-13});
    CHECK(stats.delivered == t.size());
    CHECK_FALSE(stats.unstable);
    for (std::size_t i = 0; i < t.size(); ++i)
        CHECK((out[i] - std::exp(lam * t[i]) * y0).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("DOPRI5 reports growth beyond the blow-up factor")
{
    Vector y = Vector::Ones(1);
    const auto t = grid(50.0, 10);
    const auto stats = integrate_dopri5([](const Vector& x, Vector& dx) { dx = 1.0 * x; }, y, t,
                                        [](std::size_t, const Vector&) {});
    CHECK(stats.unstable);
    CHECK(stats.delivered < t.size());
}

TEST_CASE("Rabi oscillation of a driven two-level system")
{
    SystemSpec s = bench::quantum_dot_system(1.3, 0.0);
    const auto g = build_system_generator(s);
    const auto t = grid(10.0, 50);
    const auto tr = evolve(g, s.rho0, t, {{"pe", bench::excited_projector()}});
    for (std::size_t i = 0; i < t.size(); ++i)
        CHECK(std::abs(tr.values[0][i] - std::pow(std::sin(0.65 * t[i]), 2)) < 1e-7);
    CHECK(tr.max_trace_error < 1e-10);
    CHECK(tr.max_hermiticity_error < 1e-10);
}

TEST_CASE("steady state and two-time correlation of a damped oscillator")
{
    const double w = 1.7, k = 0.4;
    const auto s = damped_oscillator(6, w, k);
    const auto g = build_system_generator(s);
    const auto ss = steady_state(g);
    CHECK(std::abs(ss.rho_s(0, 0) - 1.0) < 1e-8);
    CHECK(std::abs(ss.eigenvalue) < 1e-6);

    Matrix a = Matrix::Zero(6, 6);
    for (int j = 1; j < 6; ++j)
        a(j - 1, j) = std::sqrt(double(j));
    const auto taus = grid(40.0, 4000);
    OdeOptions tight{1e-11, 1e-13};
    const auto corr = two_time_correlation(g, ss.state, a.adjoint(), a, taus, tight);
    for (std::size_t i = 0; i < taus.size(); i += 97)
        CHECK(std::abs(corr[i] - std::exp(-cplx(k, w) * taus[i])) < 1e-8);

    // e^{+i w tau} transform of exp(-(k + i w0) tau) peaks at w = w0 with height 1/k.
    const auto omega = bench::linspace(0.0, 3.0, 301);
    const auto sp = fluorescence_spectrum(corr, taus, 0.0, omega);
    const auto peak = std::max_element(sp.values.begin(), sp.values.end()) - sp.values.begin();
    CHECK(omega[static_cast<std::size_t>(peak)] == doctest::Approx(w).epsilon(1e-9));
    for (std::size_t j = 0; j < omega.size(); j += 50)
        CHECK(sp.values[j] == doctest::Approx(k / (k * k + (omega[j] - w) * (omega[j] - w))).epsilon(1e-3));
}

TEST_CASE("spectrum refuses a correlation that has not decayed")
{
    const auto taus = grid(5.0, 100);
    std::vector<cplx> corr;
    for (double t : taus)
        corr.push_back(std::exp(-0.1 * t));
    const std::vector<double> omega{0.0};
    CHECK_THROWS_AS(fluorescence_spectrum(corr, taus, 0.0, omega), SolverError);
}

TEST_CASE("steady state cross-check of both paths")
{
    const auto s = bench::quantum_dot_system(1.0, 0.3);
    SteadyStateOptions o;
    o.cross_check = true;
    const auto ss = steady_state(build_system_generator(s), o);
    CHECK(ss.path_difference >= 0.0);
    CHECK(ss.path_difference < 1e-6);
    // Resonant two-level steady state: rho_ee = O^2 / (G^2 + 2 O^2) with G = 2 kappa the energy decay rate.
    const double kk = 2 * 0.3;
    CHECK(std::real(ss.rho_s(0, 0)) == doctest::Approx(1.0 / (kk * kk + 2.0)).epsilon(1e-6));
}

TEST_CASE("von Neumann entropy")
{
    Matrix pure = Matrix::Zero(2, 2);
    pure(1, 1) = 1.0;
    CHECK(von_neumann_entropy(pure) == doctest::Approx(0.0));
    CHECK(von_neumann_entropy(0.5 * Matrix::Identity(2, 2)) == doctest::Approx(std::numbers::ln2));
    Matrix bad = Matrix::Identity(2, 2);
    bad(1, 1) = -0.5;
    bad(0, 0) = 1.5;
    CHECK_THROWS(von_neumann_entropy(bad));
}
