#include "ppm/generators.hpp"

#include <numeric>

#include <boost/math/special_functions/binomial.hpp>

namespace ppm {

namespace {

std::vector<SparseMatrix> tuple_powers(const SparseMatrix& x, int degree)
{
    std::vector<SparseMatrix> p;
    p.push_back(identity(static_cast<std::size_t>(x.rows())));
    for (int k = 1; k <= degree; ++k)
        p.push_back(pruned(SparseMatrix(p.back() * x)));
    return p;
}

} // namespace

HeomHierarchy::HeomHierarchy(const SystemSpec& sys, const PseudomodeSet& modes, const CouplingPolynomial& poly,
                             int cap, int cutoff, int total_cap)
    : ds_(sys.dim()), family_(1, modes.family_size(), cutoff, cap)
{
    sys.validate();
    if (modes.kind != PseudomodeSet::Kind::Purified)
        throw ValidationError("hierarchy: mode set is not purified");
    const int deg = poly.degree();
    if (cap < deg)
        throw ValidationError("hierarchy: cap " + std::to_string(cap) + " is below the polynomial degree "
                              + std::to_string(deg));
    const int nf = modes.family_size();
    const std::size_t nt = family_.tuple_count();

    lookup_.assign(nt * nt, -1);
    for (std::size_t m = 0; m < nt; ++m)
        for (std::size_t n = 0; n < nt; ++n) {
            if (total_cap >= 0 && family_.total_occupation(m) + family_.total_occupation(n) > total_cap)
                continue;
            lookup_[m * nt + n] = static_cast<std::ptrdiff_t>(ados_.size());
            ados_.emplace_back(m, n);
        }
    const double dim = static_cast<double>(ados_.size()) * ds_ * ds_;
    if (dim > static_cast<double>(kMaxGeneratorDim))
        throw ValidationError("hierarchy dimension " + std::to_string(static_cast<long long>(dim))
                              + " exceeds the memory budget");

    dressing_.resize(ados_.size());
    for (std::size_t k = 0; k < ados_.size(); ++k) {
        const auto m = family_.tuple(ados_[k].first);
        const auto n = family_.tuple(ados_[k].second);
        cplx e = 0.0;
        for (int l = 0; l < nf; ++l) {
            const auto& pm = modes.purified[static_cast<std::size_t>(l)];
            e += cplx(pm.nu, -pm.gamma) * static_cast<double>(m[static_cast<std::size_t>(l)])
                 - cplx(pm.nu, pm.gamma) * static_cast<double>(n[static_cast<std::size_t>(l)]);
        }
        dressing_[k] = -I * e;
    }

    const auto t = static_cast<Eigen::Index>(nt);
    SparseMatrix xp_d(t, t), xp_c(t, t), xm_d(t, t), xm_c(t, t);
    for (int l = 0; l < nf; ++l) {
        const auto& pm = modes.purified[static_cast<std::size_t>(l)];
        const SparseMatrix d = mode_operator_tuples(family_, l, Ladder::Annihilate);
        const SparseMatrix dc = mode_operator_tuples(family_, l, Ladder::Create);
        xp_d += pm.lambda_plus * d;
        xp_c += pm.lambda_plus * dc;
        xm_d += pm.lambda_minus * d;
        xm_c += pm.lambda_minus * dc;
    }
    const auto xp = tuple_powers(SparseMatrix(xp_d + xp_c), deg);
    const auto xpd = tuple_powers(xp_d, deg);
    const auto xm = tuple_powers(SparseMatrix(xm_d + xm_c), deg);
    const auto xmc = tuple_powers(xm_c, deg);

    // <m|A|m'> couples rho_{m',n} into rho_{m,n}.
    auto ket_side = [&](const SparseMatrix& a, cplx c, Factor left, Factor right) {
        for (Eigen::Index j = 0; j < a.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(a, j); it; ++it)
                for (std::size_t n = 0; n < nt; ++n)
                    add(static_cast<std::size_t>(it.row()), n, static_cast<std::size_t>(it.col()), n, c * it.value(),
                        left, right);
    };
    // <n'|B|n> couples rho_{m,n'} into rho_{m,n}.
    auto bra_side = [&](const SparseMatrix& b, cplx c, Factor left, Factor right) {
        for (Eigen::Index j = 0; j < b.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(b, j); it; ++it)
                for (std::size_t m = 0; m < nt; ++m)
                    add(m, static_cast<std::size_t>(it.col()), m, static_cast<std::size_t>(it.row()), c * it.value(),
                        left, right);
    };
    auto both = [&](const SparseMatrix& a, const SparseMatrix& b, cplx c, Factor left, Factor right) {
        for (Eigen::Index ja = 0; ja < a.outerSize(); ++ja)
            for (SparseMatrix::InnerIterator ia(a, ja); ia; ++ia)
                for (Eigen::Index jb = 0; jb < b.outerSize(); ++jb)
                    for (SparseMatrix::InnerIterator ib(b, jb); ib; ++ib)
                        add(static_cast<std::size_t>(ia.row()), static_cast<std::size_t>(ib.col()),
                            static_cast<std::size_t>(ia.col()), static_cast<std::size_t>(ib.row()),
                            c * ia.value() * ib.value(), left, right);
    };

    meta_.cross_groups.assign(static_cast<std::size_t>(deg), 0);
    for (int k = 1; k <= deg; ++k) {
        const double a = poly[k];
        if (a == 0.0)
            continue;
        const auto uk = static_cast<std::size_t>(k);
        const cplx c = -I * a;
        ket_side(xp[uk], c, kS, kIdentity);
        bra_side(xm[uk], -c, kIdentity, kS);
        bra_side(xmc[uk], c, kS, kIdentity);
        ket_side(xpd[uk], -c, kIdentity, kS);
        for (int r = 1; r < k; ++r) {
            const auto ur = static_cast<std::size_t>(r);
            const double b = boost::math::binomial_coefficient<double>(static_cast<unsigned>(k), static_cast<unsigned>(r));
            both(xp[uk - ur], xmc[ur], c * b, kS, kIdentity);
            both(xpd[ur], xm[uk - ur], -c * b, kIdentity, kS);
        }
        meta_.cross_groups[uk - 1] = k - 1;
    }

    s_ = sys.coupling;
    left_sys_ = -I * sys.hamiltonian;
    right_sys_ = I * sys.hamiltonian;
    for (const auto& c : sys.collapses) {
        if (c.rate == 0.0)
            continue;
        const Matrix nn = c.op.adjoint() * c.op;
        left_sys_ -= c.rate * nn;
        right_sys_ -= c.rate * nn;
        jumps_.emplace_back(2.0 * c.rate, c.op);
    }

    meta_.backend = "heom";
    meta_.convention = "d rho_{m,n}/dt with the -i folded in; ADO-major stacking, each ADO column-major";
    meta_.modes = to_json(modes);
    meta_.alpha = poly.coefficients();
    meta_.cap = cap;
    meta_.cutoff = family_.cutoff();
    meta_.warnings = purified_warnings(modes, poly);
}

void HeomHierarchy::add(std::size_t target_m, std::size_t target_n, std::size_t source_m, std::size_t source_n,
                        cplx coef, Factor left, Factor right)
{
    const std::size_t nt = family_.tuple_count();
    const auto tgt = lookup_[target_m * nt + target_n];
    const auto src = lookup_[source_m * nt + source_n];
    if (tgt < 0 || src < 0 || coef == cplx(0.0))
        return;
    table_.push_back({static_cast<std::uint32_t>(tgt), static_cast<std::uint32_t>(src), coef, left, right});
}

void HeomHierarchy::apply(const Vector& x, Vector& y) const
{
    const auto d = static_cast<Eigen::Index>(ds_);
    const Eigen::Index block = d * d;
    const auto na = static_cast<Eigen::Index>(ados_.size());
    y.resize(x.size());
    // Variants s rho, rho s and s rho s of every ADO, stacked like x.
    Vector sr(x.size()), rs(x.size()), srs(x.size());
    for (Eigen::Index k = 0; k < na; ++k) {
        Eigen::Map<const Matrix> r(x.data() + k * block, d, d);
        Eigen::Map<Matrix> out(y.data() + k * block, d, d);
        Eigen::Map<Matrix> a(sr.data() + k * block, d, d);
        Eigen::Map<Matrix> b(rs.data() + k * block, d, d);
        Eigen::Map<Matrix> c(srs.data() + k * block, d, d);
        a.noalias() = s_ * r;
        b.noalias() = r * s_;
        c.noalias() = a * s_;
        out.noalias() = left_sys_ * r;
        out.noalias() += r * right_sys_;
        for (const auto& [rate, op] : jumps_)
            out.noalias() += rate * (op * r * op.adjoint());
        out += dressing_[static_cast<std::size_t>(k)] * r;
    }
    const cplx* variants[2][2] = {{x.data(), rs.data()}, {sr.data(), srs.data()}};
    cplx* out = y.data();
    for (const auto& c : table_) {
        const cplx* src = variants[c.left][c.right] + static_cast<Eigen::Index>(c.source) * block;
        cplx* dst = out + static_cast<Eigen::Index>(c.target) * block;
        for (Eigen::Index i = 0; i < block; ++i)
            dst[i] += c.coef * src[i];
    }
}

SparseMatrix HeomHierarchy::sparse() const
{
    const auto d = static_cast<std::size_t>(ds_);
    const std::size_t block = d * d;
    const SparseMatrix id = identity(d);
    const SparseMatrix s = pruned(s_.sparseView());
    const SparseMatrix st = pruned(SparseMatrix(s.transpose()));
    SparseMatrix sys = kron(id, pruned(left_sys_.sparseView())) + kron(pruned(right_sys_.transpose().sparseView()), id);
    for (const auto& [rate, op] : jumps_)
        sys += rate * kron(pruned(op.conjugate().sparseView()), pruned(op.sparseView()));
    sys = pruned(sys);
    // vec(L rho R) = (R^T kron L) vec(rho).
    const SparseMatrix variant[2][2] = {{identity(block), kron(st, id)}, {kron(id, s), kron(st, s)}};

    std::vector<Triplet> trips;
    for (std::size_t k = 0; k < ados_.size(); ++k) {
        const auto off = static_cast<Eigen::Index>(k * block);
        for (Eigen::Index j = 0; j < sys.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(sys, j); it; ++it)
                trips.emplace_back(off + it.row(), off + it.col(), it.value());
        for (std::size_t i = 0; i < block; ++i)
            trips.emplace_back(off + static_cast<Eigen::Index>(i), off + static_cast<Eigen::Index>(i), dressing_[k]);
    }
    for (const auto& c : table_) {
        const SparseMatrix& v = variant[c.left][c.right];
        const auto ro = static_cast<Eigen::Index>(c.target * block);
        const auto co = static_cast<Eigen::Index>(c.source * block);
        for (Eigen::Index j = 0; j < v.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(v, j); it; ++it)
                trips.emplace_back(ro + it.row(), co + it.col(), c.coef * it.value());
    }
    const auto n = static_cast<Eigen::Index>(dim());
    SparseMatrix m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    return pruned(std::move(m));
}

Vector HeomHierarchy::initial_state(const Matrix& rho_s) const
{
    if (rho_s.rows() != ds_ || rho_s.cols() != ds_)
        throw ValidationError("initial state: dimension does not match the system");
    Vector x = Vector::Zero(static_cast<Eigen::Index>(dim()));
    const auto k = lookup_[0];
    Eigen::Map<Matrix>(x.data() + k * ds_ * ds_, ds_, ds_) = rho_s;
    return x;
}

Matrix HeomHierarchy::reduced(const Vector& x) const
{
    const auto k = lookup_[0];
    return Eigen::Map<const Matrix>(x.data() + k * ds_ * ds_, ds_, ds_);
}

Vector HeomHierarchy::apply_system(const Matrix& op, const Vector& x, Side side) const
{
    if (op.rows() != ds_ || op.cols() != ds_)
        throw ValidationError("apply_system: operator dimension does not match the system");
    Vector y(x.size());
    const Eigen::Index block = ds_ * ds_;
    for (std::size_t k = 0; k < ados_.size(); ++k) {
        const auto off = static_cast<Eigen::Index>(k) * block;
        Eigen::Map<const Matrix> r(x.data() + off, ds_, ds_);
        Eigen::Map<Matrix> out(y.data() + off, ds_, ds_);
        if (side == Side::Left)
            out.noalias() = op * r;
        else
            out.noalias() = r * op;
    }
    return y;
}

} // namespace ppm
