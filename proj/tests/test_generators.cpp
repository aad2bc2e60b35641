#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "ppm/generators.hpp"
#include "ppm/solver.hpp"

using namespace ppm;

namespace {

std::shared_ptr<const EnrBasis> basis_for(int modes, int cap) { return std::make_shared<EnrBasis>(2, modes, 0, cap); }

AssembledGenerator cavity_ppm(const CouplingPolynomial& poly, int cap)
{
    return build_ppm_generator(two_level_atom(0.5), build_purified_modes(single_mode_decomposition(0.3, 0.5, 0.1)),
                               poly, basis_for(2, cap));
}

std::vector<double> grid(double end, int n)
{
    std::vector<double> t;
    for (int k = 0; k <= n; ++k)
        t.push_back(end * k / n);
    return t;
}

double sup_distance(const Trajectory& a, const Trajectory& b)
{
    double e = 0.0;
    for (std::size_t i = 0; i < a.rho.size(); ++i)
        e = std::max(e, (a.rho[i] - b.rho[i]).cwiseAbs().maxCoeff());
    return e;
}

int occupation(const EnrBasis& b, std::size_t full)
{
    return b.total_occupation(b.tuple_of(full));
}

} // namespace

TEST_CASE("purified generator works on the ket/bra sectors only")
{
    const auto g = cavity_ppm(CouplingPolynomial({1.0}), 4);
    // Ket keeps "+" excitations only, bra "-" only: 5 tuples each, times two levels.
    CHECK(g.ket().size() == 10);
    CHECK(g.bra().size() == 10);
    CHECK(g.dim() == 100);
    CHECK_FALSE(g.full_space());
    CHECK(g.metadata().backend == "ppm");
}

TEST_CASE("purified structure audit passes for every degree up to three")
{
    const auto sys = two_level_atom(0.5);
    ExponentialDecomposition d;
    d.terms = {{cplx(0.05, 0.01), 0.5, 0.3}, {cplx(0.02, -0.004), -0.2, 0.8}};
    d.sigma2 = 0.07;
    const auto modes = build_purified_modes(d);
    EnrBasis b(2, 4, 0, 3);
    for (const auto& poly : {CouplingPolynomial({1.0}), CouplingPolynomial({1.0, 0.4}),
                             CouplingPolynomial({0.3, -0.2, 0.15})}) {
        const auto terms = ppm_terms(sys, modes, poly, b);
        const auto audit = audit_purified_structure(terms, b, 2);
        CHECK_MESSAGE(audit.ok, audit.first_violation);
    }
}

TEST_CASE("degree-n interaction has n - 1 binomial cross-term groups")
{
    const auto g = cavity_ppm(CouplingPolynomial({1.0, 0.3, 0.2, 0.1}), 4);
    CHECK(g.metadata().cross_groups == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("even coupling keeps the parity of the total excitation number")
{
    auto breaks_parity = [](const AssembledGenerator& g) {
        const auto& b = g.basis();
        const std::size_t nk = g.ket().size();
        const SparseMatrix& l = g.matrix();
        for (Eigen::Index j = 0; j < l.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(l, j); it; ++it) {
                const auto r = static_cast<std::size_t>(it.row()), c = static_cast<std::size_t>(it.col());
                const int pr = occupation(b, g.ket()[r % nk]) + occupation(b, g.bra()[r / nk]);
                const int pc = occupation(b, g.ket()[c % nk]) + occupation(b, g.bra()[c / nk]);
                if ((pr - pc) % 2 != 0)
                    return true;
            }
        return false;
    };
    CHECK_FALSE(breaks_parity(cavity_ppm(CouplingPolynomial({0.0, 1.0}), 6)));
    CHECK_FALSE(breaks_parity(cavity_ppm(CouplingPolynomial({0.0, 1.0, 0.0, 0.5}), 6)));
    CHECK(breaks_parity(cavity_ppm(CouplingPolynomial({1.0}), 6)));
}

TEST_CASE("generator is additive in the coupling polynomial")
{
    const int cap = 5;
    const SparseMatrix l1 = cavity_ppm(CouplingPolynomial({0.7}), cap).matrix();
    const SparseMatrix l1x2 = cavity_ppm(CouplingPolynomial({1.4}), cap).matrix();
    const SparseMatrix l2 = cavity_ppm(CouplingPolynomial({0.0, -0.3}), cap).matrix();
    const SparseMatrix l3 = cavity_ppm(CouplingPolynomial({0.0, 0.0, 0.2}), cap).matrix();
    const SparseMatrix both = cavity_ppm(CouplingPolynomial({0.7, -0.3, 0.2}), cap).matrix();
    // Free part L_S + L_0 = 2 L(a X) - L(2 a X).
    const Matrix free = 2.0 * Matrix(l1) - Matrix(l1x2);
    const Matrix sum = Matrix(l1) + Matrix(l2) + Matrix(l3) - 2.0 * free;
    CHECK((Matrix(both) - sum).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("PPM and HEOM backends give the same reduced dynamics")
{
    const auto sys = two_level_atom(0.5);
    ExponentialDecomposition d;
    d.terms = {{cplx(0.05, 0.01), 0.5, 0.3}, {cplx(0.02, -0.004), -0.2, 0.8}};
    d.sigma2 = 0.07;
    const auto modes = build_purified_modes(d);
    const auto t = grid(10.0, 50);
    OdeOptions tight;
    tight.rtol = 1e-12;
    tight.atol = 1e-14;
    for (const auto& poly : {CouplingPolynomial({1.0}), CouplingPolynomial({1.0, 0.4, -0.1})}) {
        const auto p = build_ppm_generator(sys, modes, poly, std::make_shared<EnrBasis>(2, 4, 0, 3));
        const HeomHierarchy h(sys, modes, poly, 3);
        CHECK(h.dim() == p.dim());
        CHECK(sup_distance(evolve(p, sys.rho0, t, {}, tight), evolve(h, sys.rho0, t, {}, tight)) < 1e-10);
    }
}

TEST_CASE("HEOM total cap prunes the product set")
{
    const auto modes = build_purified_modes(single_mode_decomposition(0.3, 0.5, 0.1));
    const HeomHierarchy full(two_level_atom(0.5), modes, CouplingPolynomial({1.0}), 4);
    const HeomHierarchy pruned(two_level_atom(0.5), modes, CouplingPolynomial({1.0}), 4, 0, 4);
    CHECK(full.ado_count() == 25);
    CHECK(pruned.ado_count() == 15);
}

TEST_CASE("sign flip of a purified pair leaves the reduced dynamics unchanged")
{
    const auto sys = two_level_atom(0.5);
    ExponentialDecomposition d;
    d.terms = {{cplx(0.05, 0.01), 0.5, 0.3}, {cplx(0.02, -0.004), -0.2, 0.8}};
    d.sigma2 = 0.07;
    auto modes = build_purified_modes(d);
    auto flipped = modes;
    flipped.flip_sign(1);
    const CouplingPolynomial poly({1.0, 0.3, 0.1});
    const auto t = grid(10.0, 40);
    const auto a = evolve(build_ppm_generator(sys, modes, poly, std::make_shared<EnrBasis>(2, 4, 0, 4)), sys.rho0, t);
    const auto b = evolve(build_ppm_generator(sys, flipped, poly, std::make_shared<EnrBasis>(2, 4, 0, 4)), sys.rho0, t);
    CHECK(sup_distance(a, b) < 1e-9);
}

TEST_CASE("linear PPM reproduces the exact damped cavity")
{
    const auto sys = two_level_atom(0.5);
    const CouplingPolynomial poly({1.0});
    const auto t = grid(20.0, 80);
    const auto ppm = evolve(cavity_ppm(poly, 8), sys.rho0, t);
    const auto exact = evolve(build_exact_cavity_generator(sys, SingleMode{0.3, 0.5, 0.1}, poly, 20), sys.rho0, t);
    CHECK(sup_distance(ppm, exact) < 1e-4);
}

TEST_CASE("finite-a backend approaches the purified one as a grows")
{
    const auto sys = two_level_atom(0.5);
    const auto d = single_mode_decomposition(0.3, 0.5, 0.1);
    const CouplingPolynomial poly({1.0});
    const auto t = grid(10.0, 40);
    const auto ref = evolve(cavity_ppm(poly, 4), sys.rho0, t);
    double prev = 1.0;
    for (double a : {1.0, 2.0, 4.0}) {
        const auto g = build_finite_a_generator(sys, build_finite_a_modes(d, a), poly,
                                                std::make_shared<EnrBasis>(2, 3, 0, 4));
        CHECK(g.full_space());
        const double e = sup_distance(evolve(g, sys.rho0, t), ref);
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("unstable truncations are flagged")
{
    auto g = cavity_ppm(CouplingPolynomial({1.0, 0.0, 0.15}), 16);
    check_instability(g);
    CHECK_FALSE(g.metadata().warnings.empty());
    auto ok = cavity_ppm(CouplingPolynomial({1.0}), 6);
    check_instability(ok);
    CHECK(ok.metadata().warnings.empty());
    CHECK(*max_real_eigenvalue(ok) < 1e-10);
}

TEST_CASE("system-only generator")
{
    auto sys = two_level_atom(1.0);
    const auto g = build_system_generator(sys);
    CHECK(g.dim() == 4);
    const auto tr = evolve(g, sys.rho0, grid(5.0, 10));
    for (const auto& r : tr.rho)
        CHECK((r - sys.rho0).norm() < 1e-12);
}
