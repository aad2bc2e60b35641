#include "ppm/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace ppm {

cplx BarycentricRational::operator()(cplx z) const
{
    cplx num = 0.0;
    cplx den = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j) {
        const cplx dz = z - support[j];
        if (dz == cplx(0.0))
            return values[j];
        num += weights[j] * values[j] / dz;
        den += weights[j] / dz;
    }
    return num / den;
}

BarycentricRational aaa_fit(std::span<const double> omega, std::span<const double> values,
                            double tol, int max_order)
{
    const auto k = static_cast<Eigen::Index>(omega.size());
    if (k < 4)
        throw ValidationError("aaa_fit: need at least 4 samples");
    if (values.size() != omega.size())
        throw ValidationError("aaa_fit: omega and values differ in length");
    if (!(tol > 0.0) && tol != 0.0)
        throw ValidationError("aaa_fit: tol must be positive");
    if (max_order < 1)
        throw ValidationError("aaa_fit: max_order must be >= 1");
    {
        std::vector<double> sorted(omega.begin(), omega.end());
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw ValidationError("aaa_fit: sample frequencies must be distinct");
    }
    max_order = std::min<int>(max_order, static_cast<int>(k) - 1);

    const Eigen::Map<const Eigen::VectorXd> z(omega.data(), k);
    const Eigen::Map<const Eigen::VectorXd> f(values.data(), k);
    const double fmax = f.cwiseAbs().maxCoeff();

    std::vector<bool> is_support(static_cast<std::size_t>(k), false);
    Eigen::MatrixXd cauchy(k, max_order);
    Eigen::VectorXd approx = Eigen::VectorXd::Constant(k, f.mean());

    BarycentricRational r;
    Eigen::VectorXd w;
    for (int m = 1; m <= max_order; ++m) {
        // Greedy pick; Eigen's maxCoeff returns the lowest index on ties.
        Eigen::VectorXd resid = (f - approx).cwiseAbs();
        for (Eigen::Index i = 0; i < k; ++i)
            if (is_support[static_cast<std::size_t>(i)])
                resid[i] = -1.0;
        Eigen::Index jmax = 0;
        resid.maxCoeff(&jmax);
        is_support[static_cast<std::size_t>(jmax)] = true;
        r.support.push_back(z[jmax]);
        r.values.push_back(f[jmax]);

        for (Eigen::Index i = 0; i < k; ++i)
            cauchy(i, m - 1) = is_support[static_cast<std::size_t>(i)] ? 0.0 : 1.0 / (z[i] - z[jmax]);

        std::vector<Eigen::Index> rows;
        rows.reserve(static_cast<std::size_t>(k - m));
        for (Eigen::Index i = 0; i < k; ++i)
            if (!is_support[static_cast<std::size_t>(i)])
                rows.push_back(i);

        Eigen::MatrixXd loewner(static_cast<Eigen::Index>(rows.size()), m);
        for (std::size_t a = 0; a < rows.size(); ++a)
            for (int j = 0; j < m; ++j)
                loewner(static_cast<Eigen::Index>(a), j) = (f[rows[a]] - r.values[static_cast<std::size_t>(j)]) * cauchy(rows[a], j);

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(loewner, Eigen::ComputeFullV);
        w = svd.matrixV().col(m - 1);

        approx = f;
        Eigen::VectorXd wf(m);
        for (int j = 0; j < m; ++j)
            wf[j] = w[j] * r.values[static_cast<std::size_t>(j)];
        for (auto i : rows) {
            const double num = cauchy.row(i).head(m).dot(wf);
            const double den = cauchy.row(i).head(m).dot(w);
            approx[i] = num / den;
        }
        r.residual = (f - approx).cwiseAbs().maxCoeff();
        if (r.residual <= tol * fmax) {
            r.converged = true;
            break;
        }
    }
    r.weights.assign(w.data(), w.data() + w.size());
    return r;
}

std::vector<PoleResidue> poles_residues(const BarycentricRational& r)
{
    const int m = r.order();
    if (m < 2)
        throw ValidationError("poles_residues: need at least 2 support points");
    const int n = m + 1;
    std::vector<cplx> a(static_cast<std::size_t>(n * n), 0.0);
    std::vector<cplx> b(static_cast<std::size_t>(n * n), 0.0);
    auto at = [n](std::vector<cplx>& mat, int i, int j) -> cplx& {
        return mat[static_cast<std::size_t>(i + j * n)];
    };
    for (int j = 0; j < m; ++j) {
        at(a, 0, j + 1) = r.weights[static_cast<std::size_t>(j)];
        at(a, j + 1, 0) = 1.0;
        at(a, j + 1, j + 1) = r.support[static_cast<std::size_t>(j)];
        at(b, j + 1, j + 1) = 1.0;
    }
    std::vector<cplx> alpha(static_cast<std::size_t>(n));
    std::vector<cplx> beta(static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_zggev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, b.data(), n,
                                          alpha.data(), beta.data(), nullptr, 1, nullptr, 1);
    if (info != 0)
        throw SolverError("poles_residues: generalized eigen-solver failed, info = " + std::to_string(info));

    double scale = 1.0;
    for (double x : r.support)
        scale = std::max(scale, std::abs(x));

    std::vector<PoleResidue> out;
    for (int i = 0; i < n; ++i) {
        const cplx al = alpha[static_cast<std::size_t>(i)];
        const cplx be = beta[static_cast<std::size_t>(i)];
        if (std::abs(be) <= 1e-13 * std::abs(al))
            continue; // infinite eigenvalue
        const cplx p = al / be;
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()) || std::abs(p) > 1e10 * scale)
            continue;
        cplx num = 0.0;
        cplx dden = 0.0;
        for (int j = 0; j < m; ++j) {
            const cplx dz = p - r.support[static_cast<std::size_t>(j)];
            const cplx wj = r.weights[static_cast<std::size_t>(j)];
            num += wj * r.values[static_cast<std::size_t>(j)] / dz;
            dden -= wj / (dz * dz);
        }
        out.push_back({p, num / dden});
    }
    std::sort(out.begin(), out.end(), [](const PoleResidue& x, const PoleResidue& y) {
        if (x.pole.real() != y.pole.real())
            return x.pole.real() < y.pole.real();
        return x.pole.imag() < y.pole.imag();
    });
    return out;
}

cplx ExponentialDecomposition::weight_sum() const
{
    cplx s = 0.0;
    for (const auto& t : terms)
        s += t.w;
    return s;
}

cplx ExponentialDecomposition::correlation(double t) const
{
    const double at = std::abs(t);
    cplx c = 0.0;
    for (const auto& term : terms)
        c += term.w * std::exp(cplx(-term.gamma * at, -term.nu * at));
    return t >= 0.0 ? c : std::conj(c);
}

double ExponentialDecomposition::spectrum(double omega) const
{
    double s = 0.0;
    for (const auto& term : terms)
        s += 2.0 * (term.w / cplx(term.gamma, -(omega - term.nu))).real();
    return s;
}

ExponentialDecomposition to_exponential_decomposition(std::span<const PoleResidue> pr, double sigma2,
                                                      double discard_threshold, double min_gamma)
{
    ExponentialDecomposition d;
    d.sigma2 = sigma2;
    for (const auto& x : pr) {
        if (!(-x.pole.imag() > min_gamma) || std::abs(x.residue) < discard_threshold)
            continue;
        d.terms.push_back({-I * x.residue, x.pole.real(), -x.pole.imag()});
    }
    if (d.terms.empty())
        throw SolverError("to_exponential_decomposition: no admissible lower-half-plane poles");
    d.moment_mismatch = std::abs(d.weight_sum() - sigma2);
    d.moment_warning = d.moment_mismatch > kMomentWarnRelative * std::abs(sigma2);
    return d;
}

double trapezoid(std::span<const double> x, std::span<const double> y)
{
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

DecompositionErrors decomposition_errors(const ExponentialDecomposition& d, const BathSpec& bath,
                                         std::span<const double> t_grid,
                                         std::span<const double> omega_grid)
{
    DecompositionErrors e;
    std::vector<double> diff(omega_grid.size());
    for (std::size_t i = 0; i < omega_grid.size(); ++i)
        diff[i] = std::abs(eval_power_spectrum(bath, omega_grid[i]) - d.spectrum(omega_grid[i]));
    e.eps_S = trapezoid(omega_grid, diff);
    e.eps_C.reserve(t_grid.size());
    for (double t : t_grid)
        e.eps_C.push_back(std::abs(eval_correlation(bath, t) - d.correlation(t)));
    return e;
}

namespace {

// Poles this close to the real axis are Froissart doublets of the fit, not bath features.
constexpr double kNearRealPole = 1e-10;

ExponentialDecomposition decompose(const BarycentricRational& r, double sigma2, double smax, double width)
{
    const auto pr = poles_residues(r);
    return to_exponential_decomposition(pr, sigma2, 1e-12 * smax, kNearRealPole * width);
}

} // namespace

std::pair<double, double> default_fit_window(const BathSpec& bath)
{
    if (const auto* so = std::get_if<SuperOhmic>(&bath.density))
        return {-16.0 * so->omega_b, 16.0 * so->omega_b};
    if (const auto* tab = std::get_if<Tabulated>(&bath.density))
        return {-tab->max_omega(), tab->max_omega()};
    const auto& sm = std::get<SingleMode>(bath.density);
    return {sm.nu - 200.0 * sm.gamma, sm.nu + 200.0 * sm.gamma};
}

FitResult fit_bath(const BathSpec& bath, const FitOptions& opts)
{
    bath.validate();
    auto [lo, hi] = std::pair{opts.omega_min, opts.omega_max};
    if (!(hi > lo))
        std::tie(lo, hi) = default_fit_window(bath);
    if (opts.samples < 4)
        throw ValidationError("fit: need >= 4 samples");
    FitResult out;
    out.omega.resize(static_cast<std::size_t>(opts.samples));
    out.spectrum.resize(out.omega.size());
    const double dw = (hi - lo) / (opts.samples - 1);
    const double width = hi - lo;
    std::vector<double> abs_s(out.omega.size());
    for (std::size_t i = 0; i < out.omega.size(); ++i) {
        out.omega[i] = lo + dw * static_cast<double>(i);
        out.spectrum[i] = eval_power_spectrum(bath, out.omega[i]);
        abs_s[i] = std::abs(out.spectrum[i]);
    }
    out.spectrum_l1 = trapezoid(out.omega, abs_s);
    const double smax = *std::max_element(abs_s.begin(), abs_s.end());
    const double sigma2 = second_moment(bath);

    if (opts.n_terms > 0) {
        bool found = false;
        for (int m = 2; m <= opts.max_order && !found; ++m) {
            auto r = aaa_fit(out.omega, out.spectrum, 0.0, m);
            if (r.order() < m)
                break;
            try {
                auto d = decompose(r, sigma2, smax, width);
                if (d.N() == opts.n_terms) {
                    out.rational = std::move(r);
                    out.decomposition = std::move(d);
                    found = true;
                }
            } catch (const SolverError&) {
                // no admissible poles yet at this order
            }
        }
        if (!found)
            throw SolverError("fit: no AAA order up to " + std::to_string(opts.max_order)
                              + " yields exactly " + std::to_string(opts.n_terms) + " terms");
    } else {
        out.rational = aaa_fit(out.omega, out.spectrum, opts.tol, opts.max_order);
        out.decomposition = decompose(out.rational, sigma2, smax, width);
    }

    std::vector<double> diff(out.omega.size());
    for (std::size_t i = 0; i < out.omega.size(); ++i)
        diff[i] = std::abs(out.spectrum[i] - out.decomposition.spectrum(out.omega[i]));
    out.decomposition.eps_S = trapezoid(out.omega, diff);
    return out;
}

nlohmann::json to_json(const ExponentialDecomposition& d)
{
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : d.terms)
        terms.push_back({{"w_re", t.w.real()}, {"w_im", t.w.imag()}, {"nu", t.nu}, {"gamma", t.gamma}});
    return {{"terms", terms},
            {"sigma2", d.sigma2},
            {"eps_S", d.eps_S},
            {"N", d.N()},
            {"moment_mismatch", d.moment_mismatch},
            {"moment_warning", d.moment_warning}};
}

ExponentialDecomposition decomposition_from_json(const nlohmann::json& j)
{
    ExponentialDecomposition d;
    try {
        for (const auto& t : j.at("terms"))
            d.terms.push_back({cplx(t.at("w_re").get<double>(), t.at("w_im").get<double>()),
                               t.at("nu").get<double>(), t.at("gamma").get<double>()});
        d.sigma2 = j.at("sigma2").get<double>();
        d.eps_S = j.value("eps_S", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("decomposition file: ") + e.what());
    }
    if (d.terms.empty())
        throw ValidationError("decomposition file: no terms");
    if (j.contains("N") && j.at("N").get<int>() != d.N())
        throw ValidationError("decomposition file: N does not match the number of terms");
    for (const auto& t : d.terms)
        if (!(t.gamma > 0.0))
            throw ValidationError("decomposition file: every gamma must be positive");
    d.moment_mismatch = std::abs(d.weight_sum() - d.sigma2);
    d.moment_warning = d.moment_mismatch > kMomentWarnRelative * std::abs(d.sigma2);
    return d;
}

} // namespace ppm
