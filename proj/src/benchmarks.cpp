#include "ppm/benchmarks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "ppm/units.hpp"

namespace ppm::bench {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn)
{
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(m);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

std::vector<double> linspace(double a, double b, int points)
{
    if (points < 1)
        throw ValidationError("grid needs at least one point");
    std::vector<double> v(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        v[static_cast<std::size_t>(i)] = points == 1 ? a : a + (b - a) * i / (points - 1);
    return v;
}

Matrix excited_projector()
{
    Matrix p = Matrix::Zero(2, 2);
    p(0, 0) = 1.0;
    return p;
}

Matrix sigma_plus()
{
    Matrix p = Matrix::Zero(2, 2);
    p(0, 1) = 1.0;
    return p;
}

Matrix sigma_minus() { return sigma_plus().adjoint(); }

SystemSpec lossy_cavity_system() { return two_level_atom(0.5); }

SingleMode lossy_cavity_mode() { return {0.3, 0.5, 0.1}; }

CavityComparison compare_with_cavity(const std::array<double, 3>& alpha, const CavityOptions& opts)
{
    CavityComparison res;
    res.alpha = alpha;
    const SystemSpec sys = lossy_cavity_system();
    const SingleMode cav = lossy_cavity_mode();
    const CouplingPolynomial poly({alpha[0], alpha[1], alpha[2]});
    const auto modes = build_purified_modes(single_mode_decomposition(cav.lambda, cav.nu, cav.gamma));
    const int nmodes = modes.mode_count();
    const auto ppm = build_ppm_generator(sys, modes, poly, std::make_shared<EnrBasis>(sys.dim(), nmodes, 0, opts.cap));
    const auto exact = build_exact_cavity_generator(sys, cav, poly, opts.cavity_cap);
    res.times = linspace(0.0, opts.t_end, opts.points);
    const std::vector<Observable> obs{{"population", excited_projector()}};
    const auto a = evolve(ppm, sys.rho0, res.times, obs, opts.ode);
    const auto b = evolve(exact, sys.rho0, res.times, obs, opts.ode);
    res.unstable = a.stats.unstable || b.stats.unstable;
    res.max_trace_error = std::max(a.max_trace_error, b.max_trace_error);
    res.max_hermiticity_error = std::max(a.max_hermiticity_error, b.max_hermiticity_error);
    const std::size_t n = std::min(a.rho.size(), b.rho.size());
    for (std::size_t i = 0; i < n; ++i) {
        res.population_ppm.push_back(a.values[0][i].real());
        res.population_exact.push_back(b.values[0][i].real());
        res.entropy_ppm.push_back(von_neumann_entropy(a.rho[i]));
        res.entropy_exact.push_back(von_neumann_entropy(b.rho[i]));
        res.population_error = std::max(res.population_error, std::abs(a.values[0][i] - b.values[0][i]));
        res.entropy_error = std::max(res.entropy_error, std::abs(res.entropy_ppm.back() - res.entropy_exact.back()));
    }
    res.times.resize(n);
    return res;
}

std::vector<SteadyPoint> steady_grid(std::span<const double> alpha2, std::span<const double> alpha3, int cap,
                                     int threads)
{
    const SystemSpec sys = lossy_cavity_system();
    const SingleMode cav = lossy_cavity_mode();
    const auto modes = build_purified_modes(single_mode_decomposition(cav.lambda, cav.nu, cav.gamma));
    auto basis = std::make_shared<const EnrBasis>(sys.dim(), modes.mode_count(), 0, cap);
    std::vector<SteadyPoint> out(alpha2.size() * alpha3.size());
    parallel_for(out.size(), threads, [&](std::size_t k) {
        SteadyPoint& p = out[k];
        p.alpha2 = alpha2[k / alpha3.size()];
        p.alpha3 = alpha3[k % alpha3.size()];
        try {
            const auto gen = build_ppm_generator(sys, modes, CouplingPolynomial({1.0, p.alpha2, p.alpha3}), basis);
            const auto ss = steady_state(gen);
            p.population = ss.rho_s(0, 0).real();
            p.entropy = von_neumann_entropy(ss.rho_s);
        } catch (const Error& e) {
            p.status = e.what();
        }
    });
    return out;
}

SystemSpec quantum_dot_system(double rabi, double kappa)
{
    Matrix sx(2, 2);
    sx << 0, 1, 1, 0;
    SystemSpec sys;
    sys.hamiltonian = 0.5 * rabi * sx;
    sys.coupling = excited_projector();
    sys.collapses = {{sigma_minus(), kappa}};
    sys.rho0 = Matrix::Zero(2, 2);
    sys.rho0(1, 1) = 1.0;
    return sys;
}

BathSpec quantum_dot_phonons()
{
    const double alpha_p = 0.002 * 4.0 * M_PI * M_PI;
    return {SuperOhmic{alpha_p, units::mev_to_rad_per_ps(1.0)}, units::beta_ps_from_kelvin(4.0)};
}

double default_tau_max(const SystemSpec& sys, const PseudomodeSet* modes)
{
    double rate = INFINITY;
    for (const auto& c : sys.collapses)
        if (c.rate > 0.0)
            rate = std::min(rate, c.rate);
    if (modes)
        for (const auto& m : modes->purified)
            if (m.gamma > 0.0)
                rate = std::min(rate, m.gamma);
    if (!std::isfinite(rate))
        throw ValidationError("tau window: no positive decay rate to size it, set tau.max explicitly");
    return 15.0 / rate;
}

SpectrumRun emission_spectrum(const LinearGenerator& gen, const Matrix& apply, const Matrix& measure,
                              double tau_max, const SpectrumOptions& opts)
{
    SpectrumRun run;
    run.steady = steady_state(gen, opts.steady);
    run.tau = linspace(0.0, tau_max, opts.tau_points);
    run.corr = two_time_correlation(gen, run.steady.state, apply, measure, run.tau, opts.ode);
    const cplx offset = expectation(run.steady.rho_s, measure) * expectation(run.steady.rho_s, apply);
    run.spectrum = fluorescence_spectrum(run.corr, run.tau, offset, opts.omega);
    return run;
}

std::vector<std::size_t> local_maxima(std::span<const double> v)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
        if (v[i] > v[i - 1] && v[i] >= v[i + 1])
            idx.push_back(i);
    return idx;
}

namespace {

std::size_t nearest(std::span<const std::size_t> idx, std::span<const double> x, double target)
{
    return *std::min_element(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(x[a] - target) < std::abs(x[b] - target);
    });
}

} // namespace

MollowReport run_mollow(const MollowOptions& opts)
{
    MollowReport rep;
    const double c = units::mev_to_rad_per_ps(1.0);
    const double rabi = opts.rabi_mev * c;
    const SystemSpec sys = quantum_dot_system(rabi, opts.kappa_mev * c);
    const BathSpec bath = quantum_dot_phonons();

    FitOptions fo = opts.fit;
    if (fo.n_terms <= 0)
        fo.n_terms = 4;
    rep.decomposition = fit_bath(bath, fo).decomposition;
    const auto modes = build_purified_modes(rep.decomposition);

    const int n = static_cast<int>(std::lround(opts.omega_span_mev / opts.omega_step_mev));
    rep.omega_mev = linspace(-n * opts.omega_step_mev, n * opts.omega_step_mev, 2 * n + 1);
    SpectrumOptions so;
    so.ode = opts.ode;
    for (double w : rep.omega_mev)
        so.omega.push_back(w * c);
    const double tau_max = default_tau_max(sys, nullptr);

    const auto bare_gen = build_system_generator(sys);
    rep.bare = emission_spectrum(bare_gen, sigma_minus(), sigma_plus(), tau_max, so).spectrum.values;
    const HeomHierarchy phonon_gen(sys, modes, CouplingPolynomial({1.0}), opts.cap);
    rep.phonon = emission_spectrum(phonon_gen, sigma_minus(), sigma_plus(), tau_max, so).spectrum.values;

    const auto bare_max = local_maxima(rep.bare);
    if (bare_max.empty())
        return rep;
    const double targets[3] = {-opts.rabi_mev, 0.0, opts.rabi_mev};
    rep.triplet = true;
    for (int k = 0; k < 3; ++k) {
        rep.bare_peaks_mev[static_cast<std::size_t>(k)] = rep.omega_mev[nearest(bare_max, rep.omega_mev, targets[k])];
        if (std::abs(rep.bare_peaks_mev[static_cast<std::size_t>(k)] - targets[k]) > opts.omega_step_mev * (1 + 1e-9))
            rep.triplet = false;
    }

    const auto ph_max = local_maxima(rep.phonon);
    if (ph_max.size() < 3)
        return rep;
    rep.sideband_minus = rep.phonon[nearest(ph_max, rep.omega_mev, -opts.rabi_mev)];
    rep.sideband_plus = rep.phonon[nearest(ph_max, rep.omega_mev, opts.rabi_mev)];
    rep.bath_asymmetry = eval_power_spectrum(bath, rabi) - eval_power_spectrum(bath, -rabi);
    const double diff = rep.sideband_plus - rep.sideband_minus;
    rep.asymmetry_matches = std::abs(diff) > 1e-6 * std::max(rep.sideband_plus, rep.sideband_minus)
                            && (diff > 0) == (rep.bath_asymmetry > 0);
    return rep;
}

} // namespace ppm::bench
