#include "ppm/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ppm {

namespace {

void enumerate(int modes, int cutoff, int cap, std::vector<int>& cur, int pos, int used, std::vector<int>& out)
{
    if (pos == modes) {
        out.insert(out.end(), cur.begin(), cur.end());
        return;
    }
    for (int n = 0; n < cutoff && used + n <= cap; ++n) {
        cur[static_cast<std::size_t>(pos)] = n;
        enumerate(modes, cutoff, cap, cur, pos + 1, used + n, out);
    }
    cur[static_cast<std::size_t>(pos)] = 0;
}

// Number of tuples with n_i < cutoff and sum <= cap, counted without materializing them.
double count_tuples(int modes, int cutoff, int cap)
{
    std::vector<double> ways(static_cast<std::size_t>(cap) + 1, 0.0);
    ways[0] = 1.0;
    for (int k = 0; k < modes; ++k) {
        std::vector<double> next(ways.size(), 0.0);
        for (int s = 0; s <= cap; ++s)
            for (int n = 0; n < cutoff && s + n <= cap; ++n)
                next[static_cast<std::size_t>(s + n)] += ways[static_cast<std::size_t>(s)];
        ways = std::move(next);
    }
    return std::accumulate(ways.begin(), ways.end(), 0.0);
}

} // namespace

EnrBasis::EnrBasis(int system_dim, int modes, int cutoff, int cap, std::size_t max_states)
    : system_dim_(system_dim), modes_(modes), cutoff_(cutoff <= 0 ? cap + 1 : cutoff), cap_(cap)
{
    if (system_dim < 1 || modes < 0 || cap < 0)
        throw ValidationError("ENR basis: need system_dim >= 1, modes >= 0, cap >= 0");
    const double predicted = count_tuples(modes_, cutoff_, cap_) * system_dim_;
    if (predicted > static_cast<double>(max_states))
        throw ValidationError("ENR basis: " + std::to_string(static_cast<long long>(predicted))
                              + " states exceed the memory budget of " + std::to_string(max_states));
    std::vector<int> cur(static_cast<std::size_t>(modes_), 0);
    enumerate(modes_, cutoff_, cap_, cur, 0, 0, occ_);
    tuple_count_ = modes_ == 0 ? 1 : occ_.size() / static_cast<std::size_t>(modes_);
}

std::span<const int> EnrBasis::tuple(std::size_t t) const
{
    return {occ_.data() + t * static_cast<std::size_t>(modes_), static_cast<std::size_t>(modes_)};
}

int EnrBasis::total_occupation(std::size_t t) const
{
    auto occ = tuple(t);
    return std::accumulate(occ.begin(), occ.end(), 0);
}

std::ptrdiff_t EnrBasis::find(std::span<const int> occ) const
{
    if (static_cast<int>(occ.size()) != modes_)
        return -1;
    // Tuples are stored in lexicographic order, so binary search applies.
    std::size_t lo = 0;
    std::size_t hi = tuple_count_;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        auto t = tuple(mid);
        if (std::lexicographical_compare(t.begin(), t.end(), occ.begin(), occ.end()))
            lo = mid + 1;
        else
            hi = mid;
    }
    if (lo < tuple_count_ && std::equal(occ.begin(), occ.end(), tuple(lo).begin()))
        return static_cast<std::ptrdiff_t>(lo);
    return -1;
}

SparseMatrix mode_operator_tuples(const EnrBasis& basis, int mode, Ladder kind)
{
    if (mode < 0 || mode >= basis.mode_count())
        throw ValidationError("mode_operator: mode index out of range");
    const auto n = static_cast<Eigen::Index>(basis.tuple_count());
    std::vector<Triplet> trips;
    std::vector<int> occ(static_cast<std::size_t>(basis.mode_count()));
    for (std::size_t t = 0; t < basis.tuple_count(); ++t) {
        auto src = basis.tuple(t);
        std::copy(src.begin(), src.end(), occ.begin());
        const int k = occ[static_cast<std::size_t>(mode)];
        if (kind == Ladder::Annihilate) {
            if (k == 0)
                continue;
            occ[static_cast<std::size_t>(mode)] = k - 1;
            const auto dst = basis.find(occ);
            if (dst >= 0)
                trips.emplace_back(dst, static_cast<Eigen::Index>(t), std::sqrt(static_cast<double>(k)));
        } else {
            occ[static_cast<std::size_t>(mode)] = k + 1;
            const auto dst = basis.find(occ);
            if (dst >= 0)
                trips.emplace_back(dst, static_cast<Eigen::Index>(t), std::sqrt(static_cast<double>(k + 1)));
        }
    }
    SparseMatrix m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

SparseMatrix mode_operator(const EnrBasis& basis, int mode, Ladder kind)
{
    return kron(identity(static_cast<std::size_t>(basis.system_dim())), mode_operator_tuples(basis, mode, kind));
}

SparseMatrix system_operator(const EnrBasis& basis, const Matrix& op)
{
    if (op.rows() != basis.system_dim() || op.cols() != basis.system_dim())
        throw ValidationError("system_operator: operator dimension does not match the basis");
    return kron(pruned(op.sparseView()), identity(basis.tuple_count()));
}

SparseMatrix identity(std::size_t n)
{
    SparseMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.setIdentity();
    return m;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b)
{
    const Eigen::Index br = b.rows();
    const Eigen::Index bc = b.cols();
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
    for (Eigen::Index ja = 0; ja < a.outerSize(); ++ja)
        for (SparseMatrix::InnerIterator ia(a, ja); ia; ++ia)
            for (Eigen::Index jb = 0; jb < b.outerSize(); ++jb)
                for (SparseMatrix::InnerIterator ib(b, jb); ib; ++ib)
                    trips.emplace_back(ia.row() * br + ib.row(), ia.col() * bc + ib.col(), ia.value() * ib.value());
    SparseMatrix m(a.rows() * br, a.cols() * bc);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

SparseMatrix pruned(SparseMatrix m, double tol)
{
    m.prune([tol](Eigen::Index, Eigen::Index, const cplx& v) { return std::abs(v) > tol; });
    m.makeCompressed();
    return m;
}

SparseMatrix lift_super(const SparseMatrix& op, Side side)
{
    if (op.rows() != op.cols())
        throw ValidationError("lift_super: operator must be square");
    const auto n = static_cast<std::size_t>(op.rows());
    if (side == Side::Left)
        return kron(identity(n), op);
    return kron(SparseMatrix(op.transpose()), identity(n));
}

Vector vectorize(const Matrix& rho)
{
    return Eigen::Map<const Vector>(rho.data(), rho.size());
}

Matrix unvectorize(const Vector& v, Eigen::Index rows)
{
    if (rows <= 0 || v.size() % rows != 0)
        throw ValidationError("unvectorize: length is not a multiple of the row count");
    return Eigen::Map<const Matrix>(v.data(), rows, v.size() / rows);
}

Matrix partial_trace_system(const Matrix& rho_full, const EnrBasis& basis)
{
    const auto n = static_cast<Eigen::Index>(basis.size());
    if (rho_full.rows() != n || rho_full.cols() != n)
        throw ValidationError("partial_trace_system: state dimension does not match the basis");
    const int ds = basis.system_dim();
    Matrix out = Matrix::Zero(ds, ds);
    for (int a = 0; a < ds; ++a)
        for (int b = 0; b < ds; ++b)
            for (std::size_t t = 0; t < basis.tuple_count(); ++t)
                out(a, b) += rho_full(static_cast<Eigen::Index>(basis.index(a, t)),
                                      static_cast<Eigen::Index>(basis.index(b, t)));
    return out;
}

Matrix with_vacuum(const Matrix& rho_s, const EnrBasis& basis)
{
    const auto n = static_cast<Eigen::Index>(basis.size());
    Matrix out = Matrix::Zero(n, n);
    for (int a = 0; a < basis.system_dim(); ++a)
        for (int b = 0; b < basis.system_dim(); ++b)
            out(static_cast<Eigen::Index>(basis.index(a, 0)), static_cast<Eigen::Index>(basis.index(b, 0))) = rho_s(a, b);
    return out;
}

} // namespace ppm
