#include "ppm/generators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <boost/math/special_functions/binomial.hpp>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace ppm {

namespace {

constexpr const char* kConvention =
    "d rho/dt = L rho (the -i of i d rho/dt = L rho is folded into L); "
    "column-major vectorization, vec(A rho B) = (B^T kron A) vec(rho)";

double binomial(int n, int r) { return boost::math::binomial_coefficient<double>(static_cast<unsigned>(n), static_cast<unsigned>(r)); }

std::vector<SparseMatrix> powers(const SparseMatrix& x, int degree)
{
    std::vector<SparseMatrix> p;
    p.push_back(identity(static_cast<std::size_t>(x.rows())));
    for (int k = 1; k <= degree; ++k)
        p.push_back(pruned(SparseMatrix(p.back() * x)));
    return p;
}

void kron_into(std::vector<Triplet>& out, cplx coef, const SparseMatrix& a, const SparseMatrix& b)
{
    const Eigen::Index br = b.rows();
    const Eigen::Index bc = b.cols();
    for (Eigen::Index ja = 0; ja < a.outerSize(); ++ja)
        for (SparseMatrix::InnerIterator ia(a, ja); ia; ++ia) {
            const cplx ca = coef * ia.value();
            for (Eigen::Index jb = 0; jb < b.outerSize(); ++jb)
                for (SparseMatrix::InnerIterator ib(b, jb); ib; ++ib)
                    out.emplace_back(ia.row() * br + ib.row(), ia.col() * bc + ib.col(), ca * ib.value());
        }
}

SparseMatrix restrict_to(const SparseMatrix& a, const std::vector<std::size_t>& idx, std::size_t full)
{
    std::vector<std::ptrdiff_t> pos(full, -1);
    for (std::size_t k = 0; k < idx.size(); ++k)
        pos[idx[k]] = static_cast<std::ptrdiff_t>(k);
    std::vector<Triplet> trips;
    for (Eigen::Index j = 0; j < a.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
            const auto r = pos[static_cast<std::size_t>(it.row())];
            const auto c = pos[static_cast<std::size_t>(it.col())];
            if (r >= 0 && c >= 0)
                trips.emplace_back(r, c, it.value());
        }
    const auto n = static_cast<Eigen::Index>(idx.size());
    SparseMatrix m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

struct Jump {
    cplx rate;
    SparseMatrix op;
    SparseMatrix op_dag;
};

// -i[H, .] + sum rate (2 L . L^dag - L^dag L . - . L^dag L) with H, L possibly non-Hermitian.
SparseMatrix lindbladian(const SparseMatrix& h, const std::vector<Jump>& jumps)
{
    const auto n = static_cast<std::size_t>(h.rows());
    const SparseMatrix id = identity(n);
    std::vector<Triplet> trips;
    kron_into(trips, -I, id, h);
    kron_into(trips, I, SparseMatrix(h.transpose()), id);
    for (const auto& j : jumps) {
        const SparseMatrix nn = pruned(SparseMatrix(j.op_dag * j.op));
        kron_into(trips, 2.0 * j.rate, SparseMatrix(j.op_dag.transpose()), j.op);
        kron_into(trips, -j.rate, id, nn);
        kron_into(trips, -j.rate, SparseMatrix(nn.transpose()), id);
    }
    SparseMatrix l(static_cast<Eigen::Index>(n * n), static_cast<Eigen::Index>(n * n));
    l.setFromTriplets(trips.begin(), trips.end());
    return pruned(std::move(l));
}

std::vector<Jump> system_jumps(const SystemSpec& sys, const EnrBasis& basis)
{
    std::vector<Jump> out;
    for (const auto& c : sys.collapses) {
        if (c.rate == 0.0)
            continue;
        out.push_back({c.rate, system_operator(basis, c.op), system_operator(basis, c.op.adjoint())});
    }
    return out;
}

void check_dim(std::size_t ket, std::size_t bra)
{
    const double d = static_cast<double>(ket) * static_cast<double>(bra);
    if (d > static_cast<double>(kMaxGeneratorDim))
        throw ValidationError("generator dimension " + std::to_string(static_cast<long long>(d))
                              + " exceeds the memory budget of " + std::to_string(kMaxGeneratorDim));
}

std::vector<std::size_t> all_indices(std::size_t n)
{
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = i;
    return v;
}

std::vector<int> cross_group_counts(std::span<const SuperTerm> terms, int degree)
{
    std::vector<int> out(static_cast<std::size_t>(degree), 0);
    std::vector<std::set<std::string>> seen(static_cast<std::size_t>(degree));
    for (const auto& t : terms)
        if (t.degree > 0 && t.group.rfind("cross", 0) == 0)
            seen[static_cast<std::size_t>(t.degree - 1)].insert(t.group);
    for (int n = 0; n < degree; ++n)
        out[static_cast<std::size_t>(n)] = static_cast<int>(seen[static_cast<std::size_t>(n)].size());
    return out;
}

} // namespace

nlohmann::json to_json(const GeneratorMetadata& m)
{
    return {{"backend", m.backend}, {"convention", m.convention}, {"modes", m.modes},
            {"alpha", m.alpha},     {"cap", m.cap},               {"cutoff", m.cutoff},
            {"cross_groups", m.cross_groups}, {"warnings", m.warnings}};
}

AssembledGenerator::AssembledGenerator(SparseMatrix l, std::shared_ptr<const EnrBasis> basis,
                                       std::vector<std::size_t> ket, std::vector<std::size_t> bra,
                                       GeneratorMetadata meta)
    : l_(std::move(l)), basis_(std::move(basis)), ket_(std::move(ket)), bra_(std::move(bra)), meta_(std::move(meta))
{
    const auto ds = static_cast<std::size_t>(basis_->system_dim());
    if (ket_.size() % ds != 0 || bra_.size() % ds != 0)
        throw ConsistencyError("generator: ket/bra index lists are not level-major");
    ket_tuples_ = ket_.size() / ds;
    bra_tuples_ = bra_.size() / ds;
    for (std::size_t a = 0; a < ds; ++a) {
        for (std::size_t j = 0; j < ket_tuples_; ++j)
            if (ket_[a * ket_tuples_ + j] != basis_->index(static_cast<int>(a), basis_->tuple_of(ket_[j])))
                throw ConsistencyError("generator: ket index list is not level-major");
        for (std::size_t j = 0; j < bra_tuples_; ++j)
            if (bra_[a * bra_tuples_ + j] != basis_->index(static_cast<int>(a), basis_->tuple_of(bra_[j])))
                throw ConsistencyError("generator: bra index list is not level-major");
    }
    std::vector<std::ptrdiff_t> bpos(basis_->tuple_count(), -1);
    for (std::size_t j = 0; j < bra_tuples_; ++j)
        bpos[basis_->tuple_of(bra_[j])] = static_cast<std::ptrdiff_t>(j);
    for (std::size_t j = 0; j < ket_tuples_; ++j) {
        const auto b = bpos[basis_->tuple_of(ket_[j])];
        if (b >= 0)
            shared_tuples_.emplace_back(j, static_cast<std::size_t>(b));
    }
    const auto n = static_cast<Eigen::Index>(ket_.size() * bra_.size());
    if (l_.rows() != n || l_.cols() != n)
        throw ConsistencyError("generator: matrix size does not match the ket/bra index lists");
}

Vector AssembledGenerator::initial_state(const Matrix& rho_s) const
{
    const int ds = system_dim();
    if (rho_s.rows() != ds || rho_s.cols() != ds)
        throw ValidationError("initial state: dimension does not match the system");
    // The vacuum tuple is the first tuple of both lists.
    if (basis_->tuple_of(ket_[0]) != 0 || basis_->tuple_of(bra_[0]) != 0)
        throw ConsistencyError("initial state: vacuum is missing from the ket/bra lists");
    Vector x = Vector::Zero(static_cast<Eigen::Index>(dim()));
    Eigen::Map<Matrix> r(x.data(), static_cast<Eigen::Index>(ket_.size()), static_cast<Eigen::Index>(bra_.size()));
    for (int a = 0; a < ds; ++a)
        for (int b = 0; b < ds; ++b)
            r(static_cast<Eigen::Index>(static_cast<std::size_t>(a) * ket_tuples_),
              static_cast<Eigen::Index>(static_cast<std::size_t>(b) * bra_tuples_)) = rho_s(a, b);
    return x;
}

Matrix AssembledGenerator::reduced(const Vector& x) const
{
    const int ds = system_dim();
    Eigen::Map<const Matrix> r(x.data(), static_cast<Eigen::Index>(ket_.size()), static_cast<Eigen::Index>(bra_.size()));
    Matrix out = Matrix::Zero(ds, ds);
    for (int a = 0; a < ds; ++a)
        for (int b = 0; b < ds; ++b) {
            cplx s = 0.0;
            for (const auto& [kp, bp] : shared_tuples_)
                s += r(static_cast<Eigen::Index>(static_cast<std::size_t>(a) * ket_tuples_ + kp),
                       static_cast<Eigen::Index>(static_cast<std::size_t>(b) * bra_tuples_ + bp));
            out(a, b) = s;
        }
    return out;
}

Vector AssembledGenerator::apply_system(const Matrix& op, const Vector& x, Side side) const
{
    const int ds = system_dim();
    if (op.rows() != ds || op.cols() != ds)
        throw ValidationError("apply_system: operator dimension does not match the system");
    const auto kr = static_cast<Eigen::Index>(ket_.size());
    const auto bc = static_cast<Eigen::Index>(bra_.size());
    Eigen::Map<const Matrix> r(x.data(), kr, bc);
    Vector y = Vector::Zero(x.size());
    Eigen::Map<Matrix> out(y.data(), kr, bc);
    const auto kt = static_cast<Eigen::Index>(ket_tuples_);
    const auto bt = static_cast<Eigen::Index>(bra_tuples_);
    for (int a = 0; a < ds; ++a)
        for (int b = 0; b < ds; ++b) {
            if (op(a, b) == cplx(0.0))
                continue;
            if (side == Side::Left)
                out.middleRows(a * kt, kt) += op(a, b) * r.middleRows(b * kt, kt);
            else
                out.middleCols(b * bt, bt) += op(a, b) * r.middleCols(a * bt, bt);
        }
    return y;
}

cplx AssembledGenerator::expectation_full(const SparseMatrix& op, const Vector& x) const
{
    if (!full_space())
        throw ValidationError("expectation_full: generator does not act on the full space");
    const auto n = static_cast<Eigen::Index>(basis_->size());
    Eigen::Map<const Matrix> r(x.data(), n, n);
    cplx s = 0.0;
    for (Eigen::Index j = 0; j < op.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(op, j); it; ++it)
            s += it.value() * r(it.col(), it.row());
    return s;
}

Vector AssembledGenerator::apply_full(const SparseMatrix& op, const Vector& x, Side side) const
{
    if (!full_space())
        throw ValidationError("apply_full: generator does not act on the full space");
    const auto n = static_cast<Eigen::Index>(basis_->size());
    Eigen::Map<const Matrix> r(x.data(), n, n);
    Vector y(x.size());
    Eigen::Map<Matrix> out(y.data(), n, n);
    if (side == Side::Left)
        out = op * r;
    else
        out = r * op;
    return y;
}

std::vector<SuperTerm> ppm_terms(const SystemSpec& sys, const PseudomodeSet& modes, const CouplingPolynomial& poly,
                                 const EnrBasis& basis)
{
    if (modes.kind != PseudomodeSet::Kind::Purified)
        throw ValidationError("purified generator: mode set is not purified");
    const int nf = modes.family_size();
    if (basis.mode_count() != 2 * nf)
        throw ValidationError("purified generator: basis has " + std::to_string(basis.mode_count())
                              + " modes, expected " + std::to_string(2 * nf));
    if (basis.system_dim() != sys.dim())
        throw ValidationError("purified generator: basis system dimension does not match H_S");
    const int deg = poly.degree();
    if (basis.cap() < deg)
        throw ValidationError("purified generator: excitation cap " + std::to_string(basis.cap())
                              + " is below the polynomial degree " + std::to_string(deg));

    const SparseMatrix id = identity(basis.size());
    const SparseMatrix h = system_operator(basis, sys.hamiltonian);
    const SparseMatrix s = system_operator(basis, sys.coupling);
    const auto n = static_cast<Eigen::Index>(basis.size());
    SparseMatrix xp_d(n, n), xp_c(n, n), xm_d(n, n), xm_c(n, n);
    std::vector<SuperTerm> terms;
    terms.push_back({1.0, h, id, "system", 0});
    terms.push_back({-1.0, id, h, "system", 0});
    for (int l = 0; l < nf; ++l) {
        const auto& m = modes.purified[static_cast<std::size_t>(l)];
        const SparseMatrix dp = mode_operator(basis, l, Ladder::Annihilate);
        const SparseMatrix dpc = mode_operator(basis, l, Ladder::Create);
        const SparseMatrix dm = mode_operator(basis, l + nf, Ladder::Annihilate);
        const SparseMatrix dmc = mode_operator(basis, l + nf, Ladder::Create);
        xp_d += m.lambda_plus * dp;
        xp_c += m.lambda_plus * dpc;
        xm_d += m.lambda_minus * dm;
        xm_c += m.lambda_minus * dmc;
        terms.push_back({cplx(m.nu, -m.gamma), pruned(SparseMatrix(dpc * dp)), id, "free", 0});
        terms.push_back({-cplx(m.nu, m.gamma), id, pruned(SparseMatrix(dmc * dm)), "free", 0});
    }
    const auto p_x = powers(pruned(SparseMatrix(xp_d + xp_c)), deg);
    const auto p_xd = powers(pruned(xp_d), deg);
    const auto m_x = powers(pruned(SparseMatrix(xm_d + xm_c)), deg);
    const auto m_xc = powers(pruned(xm_c), deg);
    for (int k = 1; k <= deg; ++k) {
        const double a = poly[k];
        if (a == 0.0)
            continue;
        const auto uk = static_cast<std::size_t>(k);
        terms.push_back({a, pruned(SparseMatrix(p_x[uk] * s)), id, "x+^n s", k});
        terms.push_back({-a, id, pruned(SparseMatrix(s * m_x[uk])), "s x-^n", k});
        terms.push_back({a, s, m_xc[uk], "s . x-dag^n", k});
        terms.push_back({-a, p_xd[uk], s, "x+d^n . s", k});
        for (int r = 1; r < k; ++r) {
            const auto ur = static_cast<std::size_t>(r);
            const double c = a * binomial(k, r);
            const std::string g = "cross r=" + std::to_string(r);
            terms.push_back({c, pruned(SparseMatrix(p_x[uk - ur] * s)), m_xc[ur], g, k});
            terms.push_back({-c, p_xd[ur], pruned(SparseMatrix(s * m_x[uk - ur])), g, k});
        }
    }
    return terms;
}

PurifiedAudit audit_purified_structure(std::span<const SuperTerm> terms, const EnrBasis& basis, int family_size)
{
    PurifiedAudit out;
    auto same = [&](std::size_t i, std::size_t k, int first) {
        const auto a = basis.tuple(basis.tuple_of(i));
        const auto b = basis.tuple(basis.tuple_of(k));
        return std::equal(a.begin() + first, a.begin() + first + family_size, b.begin() + first);
    };
    auto scan = [&](const SparseMatrix& m, int frozen_first, const std::string& what) {
        for (Eigen::Index j = 0; j < m.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(m, j); it; ++it)
                if (!same(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()), frozen_first)) {
                    if (out.violations++ == 0)
                        out.first_violation = what;
                    out.ok = false;
                }
    };
    for (const auto& t : terms) {
        scan(t.left, family_size, "left factor of '" + t.group + "' moves a '-' mode");
        scan(t.right, 0, "right factor of '" + t.group + "' moves a '+' mode");
    }
    return out;
}

AssembledGenerator build_ppm_generator(const SystemSpec& sys, const PseudomodeSet& modes,
                                       const CouplingPolynomial& poly, std::shared_ptr<const EnrBasis> basis)
{
    sys.validate();
    const auto terms = ppm_terms(sys, modes, poly, *basis);
    const int nf = modes.family_size();
    const auto audit = audit_purified_structure(terms, *basis, nf);
    if (!audit.ok)
        throw ConsistencyError("purified generator: structure audit failed: " + audit.first_violation);

    std::vector<std::size_t> ket;
    std::vector<std::size_t> bra;
    for (std::size_t i = 0; i < basis->size(); ++i) {
        const auto occ = basis->tuple(basis->tuple_of(i));
        const bool no_minus = std::all_of(occ.begin() + nf, occ.end(), [](int v) { return v == 0; });
        const bool no_plus = std::all_of(occ.begin(), occ.begin() + nf, [](int v) { return v == 0; });
        if (no_minus)
            ket.push_back(i);
        if (no_plus)
            bra.push_back(i);
    }
    check_dim(ket.size(), bra.size());

    std::vector<Triplet> trips;
    for (const auto& t : terms) {
        const SparseMatrix a = restrict_to(t.left, ket, basis->size());
        const SparseMatrix b = restrict_to(t.right, bra, basis->size());
        kron_into(trips, -I * t.coef, SparseMatrix(b.transpose()), a);
    }
    for (const auto& c : sys.collapses) {
        if (c.rate == 0.0)
            continue;
        const SparseMatrix lk = restrict_to(system_operator(*basis, c.op), ket, basis->size());
        const SparseMatrix lb = restrict_to(system_operator(*basis, c.op), bra, basis->size());
        const SparseMatrix nk = restrict_to(system_operator(*basis, c.op.adjoint() * c.op), ket, basis->size());
        const SparseMatrix nb = restrict_to(system_operator(*basis, c.op.adjoint() * c.op), bra, basis->size());
        kron_into(trips, 2.0 * c.rate, SparseMatrix(lb.conjugate()), lk);
        kron_into(trips, -c.rate, identity(bra.size()), nk);
        kron_into(trips, -c.rate, SparseMatrix(nb.transpose()), identity(ket.size()));
    }
    const auto dim = static_cast<Eigen::Index>(ket.size() * bra.size());
    SparseMatrix l(dim, dim);
    l.setFromTriplets(trips.begin(), trips.end());

    GeneratorMetadata meta;
    meta.backend = "ppm";
    meta.convention = kConvention;
    meta.modes = to_json(modes);
    meta.alpha = poly.coefficients();
    meta.cap = basis->cap();
    meta.cutoff = basis->cutoff();
    meta.cross_groups = cross_group_counts(terms, poly.degree());
    meta.warnings = purified_warnings(modes, poly);
    return AssembledGenerator(pruned(std::move(l)), std::move(basis), std::move(ket), std::move(bra), std::move(meta));
}

std::vector<std::string> purified_warnings(const PseudomodeSet& modes, const CouplingPolynomial& poly)
{
    auto out = modes.warnings;
    const double im = modes.lambda_square_sum(+1).imag();
    if (poly.degree() >= 2 && std::abs(im) > 1e-12 * std::max(modes.sigma2, 1e-300)) {
        std::ostringstream msg;
        msg << "sum_l w_l has imaginary part " << im
            << "; with a nonlinear coupling the reduced trace is not conserved";
        out.push_back(msg.str());
    }
    return out;
}

AssembledGenerator build_finite_a_generator(const SystemSpec& sys, const PseudomodeSet& modes,
                                            const CouplingPolynomial& poly, std::shared_ptr<const EnrBasis> basis)
{
    sys.validate();
    if (modes.kind != PseudomodeSet::Kind::FiniteA)
        throw ValidationError("finite-a generator: mode set is not finite-a");
    const int nm = modes.mode_count();
    if (basis->mode_count() != nm)
        throw ValidationError("finite-a generator: basis has " + std::to_string(basis->mode_count())
                              + " modes, expected " + std::to_string(nm));
    if (basis->system_dim() != sys.dim())
        throw ValidationError("finite-a generator: basis system dimension does not match H_S");
    if (basis->cap() < poly.degree())
        throw ValidationError("finite-a generator: excitation cap is below the polynomial degree");
    check_dim(basis->size(), basis->size());

    const auto n = static_cast<Eigen::Index>(basis->size());
    SparseMatrix h = system_operator(*basis, sys.hamiltonian);
    SparseMatrix x(n, n);
    auto jumps = system_jumps(sys, *basis);
    for (int k = 0; k < nm; ++k) {
        const auto& m = modes.finite_a[static_cast<std::size_t>(k)];
        const SparseMatrix d = mode_operator(*basis, k, Ladder::Annihilate);
        const SparseMatrix dc = mode_operator(*basis, k, Ladder::Create);
        h += m.omega * pruned(SparseMatrix(dc * d));
        x += m.lambda * SparseMatrix(d + dc);
        jumps.push_back({m.gamma, d, dc});
    }
    const auto xp = powers(pruned(x), poly.degree());
    SparseMatrix q(n, n);
    for (int k = 1; k <= poly.degree(); ++k)
        if (poly[k] != 0.0)
            q += poly[k] * xp[static_cast<std::size_t>(k)];
    h += pruned(SparseMatrix(system_operator(*basis, sys.coupling) * q));

    GeneratorMetadata meta;
    meta.backend = "finite_a";
    meta.convention = kConvention;
    meta.modes = to_json(modes);
    meta.alpha = poly.coefficients();
    meta.cap = basis->cap();
    meta.cutoff = basis->cutoff();
    auto all = all_indices(basis->size());
    return AssembledGenerator(lindbladian(pruned(std::move(h)), jumps), std::move(basis), all, all, std::move(meta));
}

AssembledGenerator build_exact_cavity_generator(const SystemSpec& sys, const SingleMode& cavity,
                                                const CouplingPolynomial& poly, int cavity_cap)
{
    sys.validate();
    if (cavity_cap < poly.degree())
        throw ValidationError("exact cavity: photon cutoff is below the polynomial degree");
    if (!(cavity.gamma > 0.0))
        throw ValidationError("exact cavity: gamma must be positive");
    auto basis = std::make_shared<const EnrBasis>(sys.dim(), 1, cavity_cap + 1, cavity_cap);
    check_dim(basis->size(), basis->size());
    const SparseMatrix b = mode_operator(*basis, 0, Ladder::Annihilate);
    const SparseMatrix bc = mode_operator(*basis, 0, Ladder::Create);
    const auto xp = powers(pruned(SparseMatrix(cavity.lambda * (b + bc))), poly.degree());
    const auto n = static_cast<Eigen::Index>(basis->size());
    SparseMatrix q(n, n);
    for (int k = 1; k <= poly.degree(); ++k)
        if (poly[k] != 0.0)
            q += poly[k] * xp[static_cast<std::size_t>(k)];
    SparseMatrix h = system_operator(*basis, sys.hamiltonian) + cavity.nu * SparseMatrix(bc * b)
                     + SparseMatrix(system_operator(*basis, sys.coupling) * q);
    auto jumps = system_jumps(sys, *basis);
    jumps.push_back({cavity.gamma, b, bc});

    GeneratorMetadata meta;
    meta.backend = "exact_cavity";
    meta.convention = kConvention;
    meta.modes = {{"lambda", cavity.lambda}, {"nu", cavity.nu}, {"gamma", cavity.gamma}};
    meta.alpha = poly.coefficients();
    meta.cap = cavity_cap;
    meta.cutoff = cavity_cap + 1;
    auto all = all_indices(basis->size());
    return AssembledGenerator(lindbladian(pruned(std::move(h)), jumps), std::move(basis), all, all, std::move(meta));
}

AssembledGenerator build_system_generator(const SystemSpec& sys)
{
    sys.validate();
    auto basis = std::make_shared<const EnrBasis>(sys.dim(), 0, 1, 0);
    GeneratorMetadata meta;
    meta.backend = "system";
    meta.convention = kConvention;
    meta.modes = nlohmann::json::array();
    auto all = all_indices(basis->size());
    SparseMatrix l = lindbladian(pruned(system_operator(*basis, sys.hamiltonian)), system_jumps(sys, *basis));
    return AssembledGenerator(std::move(l), std::move(basis), all, all, std::move(meta));
}

std::optional<double> max_real_eigenvalue(const LinearGenerator& gen, std::size_t max_dense_dim)
{
    if (gen.dim() > max_dense_dim)
        return std::nullopt;
    Matrix dense = Matrix(gen.sparse());
    const auto n = static_cast<lapack_int>(dense.rows());
    Vector w(n);
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, dense.data(), n, w.data(), nullptr, 1,
                                          nullptr, 1);
    if (info != 0)
        throw SolverError("max_real_eigenvalue: eigen-decomposition failed (info " + std::to_string(info) + ")");
    return w.real().maxCoeff();
}

void check_instability(AssembledGenerator& gen, std::size_t max_dense_dim)
{
    const auto re = max_real_eigenvalue(gen, max_dense_dim);
    if (re && *re > 1e-8) {
        std::ostringstream msg;
        msg << "generator has an eigenvalue with real part " << *re << " at cap " << gen.metadata().cap
            << ", cutoff " << gen.metadata().cutoff << "; the truncation is unstable";
        gen.add_warning(msg.str());
    }
}

} // namespace ppm
