#include "ppm/bath.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

// pchip.hpp calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

namespace ppm {

struct Tabulated::Spline {
    boost::math::interpolators::pchip<std::vector<double>> pchip;
};

Tabulated::Tabulated(std::vector<double> omega, std::vector<double> density)
    : omega_(std::move(omega)), density_(std::move(density))
{
    if (omega_.size() != density_.size())
        throw ValidationError("tabulated density: omega and J columns differ in length");
    if (omega_.size() < 4)
        throw ValidationError("tabulated density: need at least 4 samples");
    for (std::size_t i = 0; i < omega_.size(); ++i) {
        if (omega_[i] < 0.0)
            throw ValidationError("tabulated density: negative frequency " + std::to_string(omega_[i]));
        if (density_[i] < 0.0)
            throw ValidationError("tabulated density: J < 0 at omega = " + std::to_string(omega_[i]));
        if (i > 0 && omega_[i] <= omega_[i - 1])
            throw ValidationError("tabulated density: frequencies must be strictly increasing");
    }
    auto x = omega_;
    auto y = density_;
    spline_ = std::make_shared<const Spline>(Spline{{std::move(x), std::move(y)}});
}

Tabulated Tabulated::from_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open spectral density file " + path.string());
    std::vector<double> w;
    std::vector<double> j;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double a = 0.0;
        double b = 0.0;
        if (!(ss >> a >> b)) {
            if (first) {
                first = false;
                continue;
            }
            throw ValidationError("malformed row in " + path.string() + ": " + line);
        }
        first = false;
        w.push_back(a);
        j.push_back(b);
    }
    return Tabulated(std::move(w), std::move(j));
}

double Tabulated::operator()(double omega) const
{
    if (omega < omega_.front() || omega > omega_.back())
        return 0.0;
    return std::max(0.0, spline_->pchip(omega));
}

double Tabulated::slope_at_zero() const
{
    if (omega_.front() > 0.0)
        return 0.0;
    return spline_->pchip.prime(0.0);
}

void BathSpec::validate() const
{
    if (!(beta > 0.0))
        throw ValidationError("bath: inverse temperature must be positive (or +inf)");
    std::visit(
        [](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, SuperOhmic>) {
                if (!(d.omega_b > 0.0))
                    throw ValidationError("super-Ohmic density: omega_b must be positive");
                if (d.alpha_p < 0.0)
                    throw ValidationError("super-Ohmic density: alpha_p must be non-negative");
            } else if constexpr (std::is_same_v<T, SingleMode>) {
                if (!(d.gamma > 0.0))
                    throw ValidationError("single-mode bath: gamma must be positive");
            }
        },
        density);
}

namespace {

// 1 + coth(x) and coth(x) - 1 written to stay finite for large |x|.
double one_plus_coth(double x) { return 2.0 + 2.0 / std::expm1(2.0 * x); }
double coth_minus_one(double x) { return 2.0 / std::expm1(2.0 * x); }

double coth_half(double beta, double omega)
{
    if (std::isinf(beta))
        return 1.0;
    return 1.0 / std::tanh(0.5 * beta * omega);
}

void silence_gsl()
{
    static std::once_flag flag;
    std::call_once(flag, [] { gsl_set_error_handler_off(); });
}

template <class F>
double qag(const F& f, double a, double b, double epsabs, const QuadratureOptions& opts)
{
    silence_gsl();
    gsl_function fn;
    fn.function = [](double x, void* p) { return (*static_cast<const F*>(p))(x); };
    fn.params = const_cast<F*>(&f);
    std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws(
        gsl_integration_workspace_alloc(opts.max_subdivisions), &gsl_integration_workspace_free);
    double result = 0.0;
    double abserr = 0.0;
    int status = gsl_integration_qag(&fn, a, b, epsabs, opts.rel_tol, opts.max_subdivisions,
                                     GSL_INTEG_GAUSS61, ws.get(), &result, &abserr);
    double target = std::max(epsabs, opts.rel_tol * std::abs(result));
    if (status != GSL_SUCCESS && abserr > target) {
        std::ostringstream msg;
        msg << "correlation quadrature did not converge (" << gsl_strerror(status)
            << "), achieved error " << abserr << " vs target " << target;
        throw QuadratureError(msg.str(), abserr);
    }
    return result;
}

} // namespace

double spectral_density(const SpectralDensity& density, double omega)
{
    if (omega < 0.0)
        return 0.0;
    return std::visit(
        [omega](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, SuperOhmic>) {
                return d.alpha_p * omega * omega * omega
                       * std::exp(-omega * omega / (2.0 * d.omega_b * d.omega_b));
            } else if constexpr (std::is_same_v<T, Tabulated>) {
                return d(omega);
            } else {
                throw ValidationError("single-mode bath has no spectral density; use its correlation");
            }
        },
        density);
}

double integration_cutoff(const SpectralDensity& density)
{
    if (const auto* so = std::get_if<SuperOhmic>(&density)) {
        // u^3 exp(-u^2/2) peaks at u = sqrt(3).
        const double peak = std::pow(3.0, 1.5) * std::exp(-1.5);
        double u = std::sqrt(3.0);
        while (u * u * u * std::exp(-0.5 * u * u) / peak >= 1e-12)
            u += 0.01;
        return u * so->omega_b;
    }
    if (const auto* tab = std::get_if<Tabulated>(&density))
        return tab->max_omega();
    throw ValidationError("single-mode bath has no integration cutoff");
}

cplx eval_correlation(const BathSpec& bath, double t, const QuadratureOptions& opts)
{
    if (!std::isfinite(t))
        throw ValidationError("eval_correlation: t must be finite");
    if (const auto* sm = std::get_if<SingleMode>(&bath.density))
        return sm->lambda * sm->lambda * std::exp(cplx(-sm->gamma * std::abs(t), -sm->nu * t));

    const double wmax = integration_cutoff(bath.density);
    const double beta = bath.beta;
    const auto& density = bath.density;
    auto weighted = [&](double w) { return spectral_density(density, w) * coth_half(beta, w) / std::numbers::pi; };
    auto plain = [&](double w) { return spectral_density(density, w) / std::numbers::pi; };

    // The t = 0 integrand is positive, so its integral is the L1 scale for the tolerance.
    const double scale = qag(weighted, 0.0, wmax, 0.0, opts);
    if (t == 0.0)
        return {scale, 0.0};
    const double epsabs = opts.rel_tol * scale;
    auto re_f = [&](double w) { return weighted(w) * std::cos(w * t); };
    auto im_f = [&](double w) { return -plain(w) * std::sin(w * t); };
    return {qag(re_f, 0.0, wmax, epsabs, opts), qag(im_f, 0.0, wmax, epsabs, opts)};
}

double eval_power_spectrum(const BathSpec& bath, double omega)
{
    if (!std::isfinite(omega))
        throw ValidationError("eval_power_spectrum: omega must be finite");
    if (const auto* sm = std::get_if<SingleMode>(&bath.density)) {
        const double dw = omega - sm->nu;
        return 2.0 * sm->lambda * sm->lambda * sm->gamma / (dw * dw + sm->gamma * sm->gamma);
    }
    if (omega == 0.0) {
        // Removable singularity: (1 + coth(beta w/2)) J(w) -> 2 J'(0) / beta.
        if (bath.zero_temperature())
            return 0.0;
        if (const auto* tab = std::get_if<Tabulated>(&bath.density))
            return 2.0 * tab->slope_at_zero() / bath.beta;
        return 0.0;
    }
    const double j = spectral_density(bath.density, std::abs(omega));
    if (j == 0.0)
        return 0.0;
    if (bath.zero_temperature())
        return omega > 0.0 ? 2.0 * j : 0.0;
    const double x = 0.5 * bath.beta * std::abs(omega);
    return omega > 0.0 ? one_plus_coth(x) * j : coth_minus_one(x) * j;
}

double second_moment(const BathSpec& bath, const QuadratureOptions& opts)
{
    const cplx c0 = eval_correlation(bath, 0.0, opts);
    if (std::abs(c0.imag()) > 1e-10 * std::max(1.0, std::abs(c0.real())))
        throw ConsistencyError("second moment has imaginary part " + std::to_string(c0.imag()));
    return c0.real();
}

} // namespace ppm
