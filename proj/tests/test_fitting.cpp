#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ppm/fitting.hpp"

using namespace ppm;

TEST_CASE("trapezoid integrates x^2 on [0, 1]")
{
    std::vector<double> x, y;
    for (int k = 0; k <= 2000; ++k) {
        x.push_back(k / 2000.0);
        y.push_back(x.back() * x.back());
    }
    CHECK(trapezoid(x, y) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("AAA recovers the pole and residue of a Lorentzian")
{
    const double l2 = 0.09, nu = 0.5, g = 0.1;
    std::vector<double> w, s;
    for (int k = 0; k <= 400; ++k) {
        w.push_back(-5.0 + 10.0 * k / 400);
        s.push_back(2 * l2 * g / ((w.back() - nu) * (w.back() - nu) + g * g));
    }
    const auto r = aaa_fit(w, s, 1e-13, 20);
    CHECK(r.converged);
    CHECK(r.residual < 1e-10);
    const auto pr = poles_residues(r);
    const auto lower = std::find_if(pr.begin(), pr.end(), [](const PoleResidue& p) { return p.pole.imag() < 0; });
    REQUIRE(lower != pr.end());
    CHECK(std::abs(lower->pole - cplx(nu, -g)) < 1e-8);
    // 2 l^2 g / ((w-nu)^2+g^2) has residue at nu - i g equal to 2 l^2 g / (-2 i g) = i l^2.
    CHECK(std::abs(lower->residue - cplx(0.0, l2)) < 1e-8);

    const auto d = to_exponential_decomposition(pr, l2, 1e-10);
    REQUIRE(d.N() == 1);
    CHECK(std::abs(d.terms[0].w - l2) < 1e-8);
    CHECK(d.terms[0].nu == doctest::Approx(nu));
    CHECK(d.terms[0].gamma == doctest::Approx(g));
}

TEST_CASE("barycentric form interpolates its support points")
{
    std::vector<double> w, s;
    for (int k = 0; k <= 200; ++k) {
        w.push_back(-3.0 + 6.0 * k / 200);
        s.push_back(std::exp(-w.back() * w.back()));
    }
    const auto r = aaa_fit(w, s, 1e-10, 30);
    for (std::size_t j = 0; j < r.support.size(); ++j)
        CHECK(std::abs(r(cplx(r.support[j] + 1e-13)) - r.values[j]) < 1e-9);
}

TEST_CASE("exponential decomposition is Hermitian in time and transforms to the fitted spectrum")
{
    ExponentialDecomposition d;
    d.terms = {{cplx(0.2, 0.05), 0.7, 0.3}, {cplx(0.1, -0.02), -0.4, 0.9}};
    d.sigma2 = 0.3;
    for (double t : {0.3, 1.7})
        CHECK(std::abs(d.correlation(-t) - std::conj(d.correlation(t))) < 1e-15);
    CHECK(std::abs(d.weight_sum() - cplx(0.3, 0.03)) < 1e-15);
    // Direct Fourier transform of the reconstruction.
    const double w = 0.25;
    const int n = 200000;
    const double tmax = 60.0, h = tmax / n;
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double t = k * h;
        const double f = 2.0 * std::real(d.correlation(t) * std::exp(cplx(0.0, w * t)));
        acc += (k == 0 || k == n ? 0.5 : 1.0) * f;
    }
    CHECK(d.spectrum(w) == doctest::Approx(acc * h).epsilon(1e-6));
}

TEST_CASE("fitting a single-mode bath yields its exact term")
{
    BathSpec b{SingleMode{0.3, 0.5, 0.1}};
    const auto fit = fit_bath(b, FitOptions{});
    REQUIRE(fit.decomposition.N() == 1);
    CHECK(std::abs(fit.decomposition.terms[0].w - 0.09) < 1e-6);
    CHECK(fit.decomposition.terms[0].nu == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(fit.decomposition.terms[0].gamma == doctest::Approx(0.1).epsilon(1e-6));
    CHECK_FALSE(fit.decomposition.moment_warning);
}

TEST_CASE("decomposition JSON round trip")
{
    ExponentialDecomposition d;
    d.terms = {{cplx(0.2, 0.05), 0.7, 0.3}};
    d.sigma2 = 0.2;
    d.eps_S = 1e-3;
    const auto back = decomposition_from_json(to_json(d));
    REQUIRE(back.N() == 1);
    CHECK(back.terms[0].w == d.terms[0].w);
    CHECK(back.terms[0].nu == d.terms[0].nu);
    CHECK(back.terms[0].gamma == d.terms[0].gamma);
    CHECK(back.sigma2 == d.sigma2);
    CHECK_THROWS_AS(decomposition_from_json(nlohmann::json{{"terms", 3}}), ValidationError);
}
