#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "ppm/bath.hpp"
#include "ppm/units.hpp"

using namespace ppm;

namespace {

// Composite Simpson on [a, b].
template <class F>
double simpson(F f, double a, double b, int n = 20000)
{
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int k = 1; k < n; ++k)
        s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return s * h / 3.0;
}

} // namespace

TEST_CASE("single mode correlation and spectrum are the damped exponential and its Lorentzian")
{
    BathSpec b{SingleMode{0.3, 0.5, 0.1}};
    for (double t : {0.0, 0.7, 3.0, 11.0}) {
        const cplx ref = 0.09 * std::exp(cplx(-0.1 * t, -0.5 * t));
        CHECK(std::abs(eval_correlation(b, t) - ref) < 1e-14);
    }
    CHECK(second_moment(b) == doctest::Approx(0.09));
    CHECK(eval_power_spectrum(b, 0.5) == doctest::Approx(2 * 0.09 / 0.1));
    CHECK(eval_power_spectrum(b, 0.6) == doctest::Approx(2 * 0.09 * 0.1 / (0.01 + 0.01)));
}

TEST_CASE("super-Ohmic second moment at zero temperature is alpha_p * 2 w_b^4 / pi")
{
    BathSpec b{SuperOhmic{0.7, 1.3}};
    const double ref = 0.7 * 2.0 * std::pow(1.3, 4) / std::numbers::pi;
    CHECK(second_moment(b) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("finite-temperature correlation matches direct quadrature")
{
    const SuperOhmic so{0.05, 1.0};
    BathSpec b{so, 2.0};
    const double wmax = integration_cutoff(so);
    for (double t : {0.0, 0.8, 2.5}) {
        auto re = [&](double w) {
            if (w == 0.0)
                return 0.0;
            return spectral_density(so, w) / std::numbers::pi * std::cos(w * t) / std::tanh(w);
        };
        auto im = [&](double w) { return -spectral_density(so, w) / std::numbers::pi * std::sin(w * t); };
        const cplx ref(simpson(re, 0.0, wmax), simpson(im, 0.0, wmax));
        CHECK(std::abs(eval_correlation(b, t) - ref) < 1e-8);
    }
}

TEST_CASE("power spectrum obeys detailed balance")
{
    BathSpec b{SuperOhmic{0.05, 1.0}, 3.0};
    for (double w : {0.2, 1.0, 2.2})
        CHECK(eval_power_spectrum(b, -w) == doctest::Approx(std::exp(-3.0 * w) * eval_power_spectrum(b, w)));
    BathSpec cold{SuperOhmic{0.05, 1.0}};
    CHECK(eval_power_spectrum(cold, -1.0) == 0.0);
    CHECK(eval_power_spectrum(cold, 1.0) == doctest::Approx(2.0 * spectral_density(SuperOhmic{0.05, 1.0}, 1.0)));
}

TEST_CASE("tabulated density interpolates, reads CSV, and vanishes outside the grid")
{
    const auto path = std::filesystem::temp_directory_path() / "ppm_tab_test.csv";
    {
        std::ofstream f(path);
        f << "omega,J\n0,0\n1,2\n2,4\n3,6\n";
    }
    const auto tab = Tabulated::from_csv(path);
    CHECK(tab(1.5) == doctest::Approx(3.0));
    CHECK(tab(2.75) == doctest::Approx(5.5));
    CHECK(tab(4.0) == 0.0);
    CHECK(tab.slope_at_zero() == doctest::Approx(2.0));
    std::filesystem::remove(path);
}

TEST_CASE("bath validation rejects unphysical parameters")
{
    CHECK_THROWS_AS((BathSpec{SuperOhmic{-1.0, 1.0}}.validate()), ValidationError);
    CHECK_THROWS_AS((BathSpec{SingleMode{0.3, 0.5, 0.0}}.validate()), ValidationError);
    CHECK_THROWS_AS((BathSpec{SuperOhmic{0.1, 1.0}, -1.0}.validate()), ValidationError);
    CHECK_THROWS_AS(Tabulated({0.0, 1.0}, {0.0}), ValidationError);
}

TEST_CASE("lab unit conversions")
{
    CHECK(units::mev_to_rad_per_ps(0.6582119569) == doctest::Approx(1.0));
    CHECK(units::beta_ps_from_kelvin(4.0) == doctest::Approx(0.6582119569 / (4.0 * 0.08617333)));
    CHECK(std::isinf(units::beta_ps_from_kelvin(0.0)));
}
