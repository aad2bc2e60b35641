#include <doctest.h>

#include <functional>
#include <random>
#include <vector>

#include "ppm/fock.hpp"

using namespace ppm;

namespace {

std::size_t brute_force_count(int modes, int cutoff, int cap)
{
    std::size_t count = 0;
    std::vector<int> occ(static_cast<std::size_t>(modes), 0);
    std::function<void(int, int)> rec = [&](int m, int sum) {
        if (m == modes) {
            ++count;
            return;
        }
        for (int n = 0; n < cutoff && sum + n <= cap; ++n)
            rec(m + 1, sum + n);
    };
    rec(0, 0);
    return count;
}

Matrix random_matrix(int n, std::mt19937& rng)
{
    std::normal_distribution<double> g;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = cplx(g(rng), g(rng));
    return m;
}

} // namespace

TEST_CASE("basis size matches brute-force enumeration")
{
    EnrBasis b(2, 2, 3, 2);
    CHECK(b.size() == 12);
    for (int modes : {1, 2, 3, 4})
        for (int cutoff : {2, 3, 5})
            for (int cap : {0, 1, 3, 6}) {
                EnrBasis e(3, modes, cutoff, cap);
                CHECK(e.tuple_count() == brute_force_count(modes, cutoff, cap));
                CHECK(e.size() == 3 * brute_force_count(modes, cutoff, cap));
            }
}

TEST_CASE("tuple lookup is the inverse of tuple access")
{
    EnrBasis b(1, 3, 0, 4);
    for (std::size_t t = 0; t < b.tuple_count(); ++t) {
        CHECK(b.find(b.tuple(t)) == static_cast<std::ptrdiff_t>(t));
        CHECK(b.total_occupation(t) <= 4);
    }
    const int outside[] = {3, 2, 0};
    CHECK(b.find(outside) == -1);
    CHECK(b.tuple_of(b.index(0, 0)) == 0);
    CHECK(b.find(std::vector<int>{0, 0, 0}) == 0);
}

TEST_CASE("ladder operators: number operator and canonical commutator inside the cap")
{
    EnrBasis b(2, 2, 0, 5);
    const SparseMatrix a = mode_operator(b, 1, Ladder::Annihilate);
    const SparseMatrix ad = mode_operator(b, 1, Ladder::Create);
    const Matrix num = Matrix(ad * a);
    const Matrix comm = Matrix(a * ad - ad * a);
    for (std::size_t i = 0; i < b.size(); ++i) {
        const std::size_t t = b.tuple_of(i);
        CHECK(std::abs(num(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) - double(b.occupation(t, 1)))
              < 1e-14);
        if (b.total_occupation(t) < b.cap())
            CHECK(std::abs(comm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) - 1.0) < 1e-14);
    }
    CHECK((Matrix(ad) - Matrix(a).adjoint()).norm() < 1e-14);
}

TEST_CASE("superoperator lifts reproduce dense left and right products")
{
    std::mt19937 rng(7);
    const Matrix a = random_matrix(5, rng), b = random_matrix(5, rng), rho = random_matrix(5, rng);
    const SparseMatrix la = lift_super(a.sparseView(), Side::Left);
    const SparseMatrix rb = lift_super(b.sparseView(), Side::Right);
    CHECK((unvectorize(la * vectorize(rho), 5) - a * rho).norm() < 1e-12);
    CHECK((unvectorize(rb * vectorize(rho), 5) - rho * b).norm() < 1e-12);
    CHECK((unvectorize(la * rb * vectorize(rho), 5) - a * rho * b).norm() < 1e-12);
    CHECK((Matrix(kron(a.sparseView(), b.sparseView())) - Matrix(kron(a.sparseView(), identity(5)))
                                                              * Matrix(kron(identity(5), b.sparseView())))
              .norm()
          < 1e-12);
}

TEST_CASE("partial trace over the modes")
{
    std::mt19937 rng(3);
    EnrBasis b(2, 2, 0, 2);
    const auto n = static_cast<Eigen::Index>(b.size());
    const Matrix full = random_matrix(static_cast<int>(n), rng);
    const Matrix red = partial_trace_system(full, b);
    const auto nt = static_cast<Eigen::Index>(b.tuple_count());
    for (int s = 0; s < 2; ++s)
        for (int r = 0; r < 2; ++r) {
            cplx acc = 0.0;
            for (Eigen::Index t = 0; t < nt; ++t)
                acc += full(s * nt + t, r * nt + t);
            CHECK(std::abs(red(s, r) - acc) < 1e-12);
        }
    Matrix rho_s(2, 2);
    rho_s << 0.7, cplx(0.1, 0.2), cplx(0.1, -0.2), 0.3;
    CHECK((partial_trace_system(with_vacuum(rho_s, b), b) - rho_s).norm() < 1e-15);
}

TEST_CASE("basis rejects bad shapes and oversize requests")
{
    CHECK_THROWS_AS(EnrBasis(0, 1, 0, 1), ValidationError);
    CHECK_THROWS_AS(EnrBasis(2, 1, 0, -1), ValidationError);
    CHECK_THROWS_AS(EnrBasis(2, 12, 0, 12, 1000), ValidationError);
}
