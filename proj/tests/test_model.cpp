#include <doctest.h>

#include <cmath>

#include "ppm/model.hpp"

using namespace ppm;

TEST_CASE("coupling polynomial trims trailing zeros and indexes from one")
{
    CouplingPolynomial p({1.0, 0.4, 0.0, 0.0});
    CHECK(p.degree() == 2);
    CHECK(p[1] == 1.0);
    CHECK(p[2] == 0.4);
    CHECK(p[3] == 0.0);
    CHECK(p[0] == 0.0);
    CHECK_THROWS_AS(CouplingPolynomial({0.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(CouplingPolynomial({NAN}), ValidationError);
}

TEST_CASE("system validation")
{
    auto sys = two_level_atom(0.5);
    CHECK_NOTHROW(sys.validate());
    auto bad = sys;
    bad.hamiltonian(0, 1) = 1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = sys;
    bad.rho0(0, 0) = 2.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = sys;
    bad.collapses.push_back({Matrix::Identity(3, 3), 1.0});
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("purified couplings square to the weights and their conjugates")
{
    ExponentialDecomposition d;
    d.terms = {{cplx(0.2, 0.05), 0.7, 0.3}, {cplx(-0.1, 0.02), -0.4, 0.9}};
    d.sigma2 = 0.1;
    const auto m = build_purified_modes(d);
    REQUIRE(m.family_size() == 2);
    CHECK(m.mode_count() == 4);
    for (int l = 0; l < 2; ++l) {
        const auto& p = m.purified[static_cast<std::size_t>(l)];
        CHECK(std::abs(p.lambda_plus * p.lambda_plus - d.terms[static_cast<std::size_t>(l)].w) < 1e-15);
        CHECK(std::abs(p.lambda_minus * p.lambda_minus - std::conj(d.terms[static_cast<std::size_t>(l)].w)) < 1e-15);
    }
    CHECK(std::abs(m.lambda_square_sum(+1) - d.weight_sum()) < 1e-15);
    CHECK(std::abs(m.lambda_square_sum(-1) - std::conj(d.weight_sum())) < 1e-15);

    auto flipped = m;
    flipped.flip_sign(1);
    CHECK(flipped.purified[1].lambda_plus == -m.purified[1].lambda_plus);
    CHECK(flipped.purified[1].lambda_minus == -m.purified[1].lambda_minus);

    d.terms[0].gamma = 0.0;
    CHECK_THROWS_AS(build_purified_modes(d), ValidationError);
}

TEST_CASE("finite-a correlation reproduces C(t) once the auxiliary terms have decayed")
{
    const auto d = single_mode_decomposition(0.3, 0.5, 0.1);
    const double a = 8.0;
    const auto m = build_finite_a_modes(d, a);
    CHECK(m.mode_count() == 3);
    CHECK(m.family_size() == 1);
    // At t = 0 the forward, backward and zero-frequency weights sum to sigma^2.
    CHECK(std::abs(m.correlation(0.0) - 0.09) < 1e-15);
    for (double t : {2.0, 5.0, 9.0})
        CHECK(std::abs(m.correlation(t) - d.correlation(t)) < 0.2 * std::exp(-a * t) + 1e-15);
    CHECK_THROWS_AS(build_finite_a_modes(d, 0.0), ValidationError);
    CHECK_THROWS_AS(build_purified_modes(d).correlation(1.0), ValidationError);
}
