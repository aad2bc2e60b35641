#include "ppm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/UmfPackSupport>

namespace ppm {

namespace {

double hermiticity_error(const Matrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

Rhs rhs_of(const LinearGenerator& gen)
{
    return [&gen](const Vector& x, Vector& y) { gen.apply(x, y); };
}

Vector normalized(Vector x, const LinearGenerator& gen)
{
    const cplx tr = gen.reduced(x).trace();
    if (std::abs(tr) < 1e-300)
        throw SolverError("steady state: reduced trace vanishes, cannot normalize");
    return x / tr;
}

// Shifted inverse iteration for the eigenvalue of smallest magnitude.
std::pair<Vector, cplx> inverse_iteration(const LinearGenerator& gen)
{
    SparseMatrix l = gen.sparse();
    const auto n = l.rows();
    double scale = 0.0;
    for (Eigen::Index j = 0; j < l.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(l, j); it; ++it)
            scale = std::max(scale, std::abs(it.value()));
    const cplx shift = -1e-9 * std::max(scale, 1.0);
    SparseMatrix id(n, n);
    id.setIdentity();
    SparseMatrix a = l - shift * id;
    a.makeCompressed();
    Eigen::UmfPackLU<SparseMatrix> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success)
        throw SolverError("steady state: sparse LU factorization failed");

    const int ds = gen.system_dim();
    Vector x = gen.initial_state(Matrix::Identity(ds, ds) / static_cast<double>(ds));
    x.array() += 1e-3;
    x.normalize();
    cplx lambda = 0.0;
    for (int it = 0; it < 60; ++it) {
        Vector y = lu.solve(x);
        if (lu.info() != Eigen::Success || !y.allFinite())
            throw SolverError("steady state: sparse solve failed");
        const cplx ray = x.dot(y); // x^H y with |x| = 1
        lambda = shift + 1.0 / ray;
        // Fix the phase so successive iterates are comparable.
        const Eigen::Index k = [&] {
            Eigen::Index idx = 0;
            y.cwiseAbs().maxCoeff(&idx);
            return idx;
        }();
        y *= std::abs(y[k]) / y[k];
        y.normalize();
        const double change = (y - x).cwiseAbs().maxCoeff();
        x = std::move(y);
        if (change < 1e-13)
            break;
    }
    return {x, lambda};
}

Vector integrate_to_rest(const LinearGenerator& gen, Vector x, const SteadyStateOptions& opts, bool& converged)
{
    Vector dx(x.size());
    converged = false;
    double t = 0.0;
    while (t < opts.max_time) {
        const double grid[2] = {0.0, opts.chunk};
        Vector out;
        const auto st = integrate_dopri5(rhs_of(gen), x, grid, [&](std::size_t i, const Vector& v) {
            if (i == 1)
                out = v;
        }, opts.ode);
        if (st.unstable)
            throw SolverError("steady state: integration became unstable; increase the truncation");
        x = normalized(std::move(out), gen);
        t += opts.chunk;
        gen.apply(x, dx);
        if (dx.cwiseAbs().maxCoeff() < opts.derivative_tol) {
            converged = true;
            break;
        }
    }
    return x;
}

} // namespace

Trajectory evolve(const LinearGenerator& gen, const Matrix& rho_s0, std::span<const double> times,
                  const std::vector<Observable>& observables, const OdeOptions& opts)
{
    Trajectory tr;
    tr.values.assign(observables.size(), {});
    const Vector x0 = gen.initial_state(rho_s0);
    const double tr0 = std::real(rho_s0.trace());
    tr.stats = integrate_dopri5(rhs_of(gen), x0, times, [&](std::size_t i, const Vector& x) {
        const Matrix r = gen.reduced(x);
        tr.times.push_back(times[i]);
        for (std::size_t k = 0; k < observables.size(); ++k)
            tr.values[k].push_back(expectation(r, observables[k].op));
        tr.max_trace_error = std::max(tr.max_trace_error, std::abs(r.trace() - tr0));
        tr.max_hermiticity_error = std::max(tr.max_hermiticity_error, hermiticity_error(r));
        tr.rho.push_back(r);
        if (i + 1 == times.size())
            tr.final_state = x;
    }, opts);
    return tr;
}

std::vector<cplx> propagate_and_measure(const LinearGenerator& gen, const Vector& x0, const Matrix& measure,
                                        std::span<const double> times, const OdeOptions& opts, OdeStats* stats)
{
    std::vector<cplx> out(times.size(), cplx(0.0));
    const auto st = integrate_dopri5(rhs_of(gen), x0, times, [&](std::size_t i, const Vector& x) {
        out[i] = expectation(gen.reduced(x), measure);
    }, opts);
    if (stats)
        *stats = st;
    if (st.unstable)
        throw SolverError("propagation became unstable after " + std::to_string(st.delivered) + " of "
                          + std::to_string(times.size()) + " grid points; increase the truncation");
    return out;
}

SteadyState steady_state(const LinearGenerator& gen, const SteadyStateOptions& opts)
{
    SteadyState res;
    std::string eigen_failure;
    bool have_eigen = false;
    try {
        if (gen.dim() > opts.direct_max_dim)
            throw SolverError("dimension " + std::to_string(gen.dim()) + " exceeds the direct-solver limit");
        auto [x, lambda] = inverse_iteration(gen);
        res.eigenvalue = lambda;
        if (std::abs(lambda) <= opts.eigen_tol) {
            res.state = normalized(std::move(x), gen);
            res.method = "inverse-iteration";
            have_eigen = true;
        } else {
            std::ostringstream msg;
            msg << "no eigenvalue within " << opts.eigen_tol << " of zero (nearest " << lambda
                << "); the truncation may be unstable, increase it or rely on long-time integration";
            eigen_failure = msg.str();
        }
    } catch (const SolverError& e) {
        eigen_failure = e.what();
    }

    if (have_eigen && !opts.cross_check) {
        res.rho_s = gen.reduced(res.state);
        return res;
    }

    const int ds = gen.system_dim();
    bool converged = false;
    const Vector start = have_eigen ? gen.initial_state(gen.reduced(res.state))
                                    : gen.initial_state(Matrix::Identity(ds, ds) / static_cast<double>(ds));
    Vector x = integrate_to_rest(gen, start, opts, converged);
    if (!have_eigen) {
        if (!converged)
            throw SolverError("steady state: " + eigen_failure + "; long-time integration did not settle either");
        res.state = std::move(x);
        res.method = "long-time-integration";
        res.rho_s = gen.reduced(res.state);
        return res;
    }
    if (converged) {
        res.path_difference = (gen.reduced(x) - gen.reduced(res.state)).cwiseAbs().maxCoeff();
        if (res.path_difference > opts.agreement_tol) {
            std::ostringstream msg;
            msg << "steady state: eigen and integration paths disagree by " << res.path_difference;
            throw SolverError(msg.str());
        }
    }
    res.rho_s = gen.reduced(res.state);
    return res;
}

std::vector<cplx> two_time_correlation(const LinearGenerator& gen, const Vector& state, const Matrix& apply,
                                       const Matrix& measure, std::span<const double> taus, const OdeOptions& opts)
{
    return propagate_and_measure(gen, gen.apply_system(apply, state, Side::Left), measure, taus, opts);
}

SpectrumResult fluorescence_spectrum(std::span<const cplx> corr, std::span<const double> taus, cplx offset,
                                     std::span<const double> omega)
{
    if (corr.size() != taus.size() || corr.size() < 2)
        throw ValidationError("spectrum: correlation and tau grid must have equal length >= 2");
    SpectrumResult res;
    res.offset = offset;
    res.omega.assign(omega.begin(), omega.end());
    res.residual = std::abs(corr.back() - offset);
    if (res.residual >= 1e-4 * std::abs(corr.front())) {
        std::ostringstream msg;
        msg << "spectrum: correlation has not decayed at tau_max = " << taus.back() << " (residual " << res.residual
            << ", need < " << 1e-4 * std::abs(corr.front()) << "); lengthen the tau window";
        throw SolverError(msg.str());
    }
    res.values.reserve(omega.size());
    for (double w : omega) {
        cplx acc = 0.0;
        cplx prev = std::exp(I * w * taus[0]) * (corr[0] - offset);
        for (std::size_t i = 1; i < taus.size(); ++i) {
            const cplx cur = std::exp(I * w * taus[i]) * (corr[i] - offset);
            acc += 0.5 * (taus[i] - taus[i - 1]) * (prev + cur);
            prev = cur;
        }
        res.values.push_back(acc.real());
    }
    return res;
}

double von_neumann_entropy(const Matrix& rho)
{
    const Matrix h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        double p = es.eigenvalues()[i];
        if (p < -1e-6)
            throw ValidationError("von Neumann entropy: eigenvalue " + std::to_string(p) + " violates positivity");
        p = std::clamp(p, 0.0, 1.0);
        if (p > 0.0)
            s -= p * std::log(p);
    }
    return s;
}

cplx expectation(const Matrix& rho, const Matrix& op)
{
    if (rho.rows() != op.cols() || rho.cols() != op.rows())
        throw ValidationError("expectation: operator and state dimensions differ");
    return (op * rho).trace();
}

} // namespace ppm
