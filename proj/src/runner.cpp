#include "ppm/runner.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "ppm/benchmarks.hpp"
#include "ppm/io.hpp"
#include "ppm/solver.hpp"

namespace ppm {

using nlohmann::json;

namespace {

struct Column {
    std::string name;
    std::function<double(const Matrix&)> eval;
};

std::vector<Column> observable_columns(const Scenario& s)
{
    std::vector<Column> cols;
    const int dim = s.system.dim();
    auto add_op = [&](const std::string& name, const Matrix& op) {
        if ((op - op.adjoint()).cwiseAbs().maxCoeff() < 1e-14) {
            cols.push_back({name, [op](const Matrix& r) { return expectation(r, op).real(); }});
        } else {
            cols.push_back({name + "_re", [op](const Matrix& r) { return expectation(r, op).real(); }});
            cols.push_back({name + "_im", [op](const Matrix& r) { return expectation(r, op).imag(); }});
        }
    };
    for (const auto& name : s.outputs.observables) {
        if (name == "entropy")
            cols.push_back({name, [](const Matrix& r) { return von_neumann_entropy(r); }});
        else if (name == "trace")
            cols.push_back({name, [](const Matrix& r) { return r.trace().real(); }});
        else if (name == "purity")
            cols.push_back({name, [](const Matrix& r) { return (r * r).trace().real(); }});
        else
            add_op(name, parse_operator(json(name), dim, "outputs.observables"));
    }
    for (const auto& [name, op] : s.outputs.custom_observables)
        add_op(name, op);
    return cols;
}

json metadata_of(const LinearGenerator& gen)
{
    if (const auto* a = dynamic_cast<const AssembledGenerator*>(&gen))
        return to_json(a->metadata());
    if (const auto* h = dynamic_cast<const HeomHierarchy*>(&gen)) {
        json m = to_json(h->metadata());
        m["ado_count"] = h->ado_count();
        return m;
    }
    return json::object();
}

OdeOptions ode_of(const Scenario& s)
{
    OdeOptions o;
    o.rtol = s.numerics.rtol;
    o.atol = s.numerics.atol;
    return o;
}

std::ostream& log_of(const RunContext& ctx) { return ctx.log ? *ctx.log : std::cout; }

std::filesystem::path out_path(const Scenario& s, const RunContext& ctx, const std::string& suffix)
{
    return ctx.out_dir / (s.outputs.prefix + suffix);
}

void emit(const Scenario& s, const RunContext& ctx, const std::filesystem::path& path, const Table& t,
          const json& header, const std::string& title)
{
    write_csv(path, t, header);
    if (header.contains("generator") && header["generator"].contains("warnings"))
        for (const auto& w : header["generator"]["warnings"])
            log_of(ctx) << "warning: " << w.get<std::string>() << '\n';
    if (s.outputs.svg) {
        auto svg = path;
        svg.replace_extension(".svg");
        write_svg(svg, t, title);
    }
    log_of(ctx) << "wrote " << path.string() << '\n';
}

struct TrajectoryRun {
    Trajectory traj;
    Table table;
    json meta;
};

TrajectoryRun simulate_once(const Scenario& s, const std::string& backend, int cap, double a)
{
    TrajectoryRun r;
    const auto gen = make_generator(s, backend, cap, a);
    r.meta = metadata_of(*gen);
    const auto times = s.outputs.times.values();
    r.traj = evolve(*gen, s.system.rho0, times, {}, ode_of(s));
    r.table.add("time", r.traj.times);
    for (const auto& c : observable_columns(s)) {
        std::vector<double> v;
        for (const auto& rho : r.traj.rho)
            v.push_back(c.eval(rho));
        r.table.add(c.name, std::move(v));
    }
    return r;
}

json diagnostics_of(const Trajectory& t)
{
    return {{"steps", t.stats.steps},
            {"rejected", t.stats.rejected},
            {"unstable", t.stats.unstable},
            {"max_trace_error", t.max_trace_error},
            {"max_hermiticity_error", t.max_hermiticity_error}};
}

double table_distance(const Table& a, const Table& b)
{
    double d = 0.0;
    const std::size_t rows = std::min(a.rows(), b.rows());
    for (std::size_t c = 1; c < std::min(a.columns.size(), b.columns.size()); ++c)
        for (std::size_t r = 0; r < rows; ++r)
            d = std::max(d, std::abs(a.data[c][r] - b.data[c][r]));
    if (a.rows() != b.rows())
        d = INFINITY;
    return d;
}

double rho_distance(const Trajectory& a, const Trajectory& b)
{
    if (a.rho.size() != b.rho.size())
        return INFINITY;
    double d = 0.0;
    for (std::size_t i = 0; i < a.rho.size(); ++i)
        d = std::max(d, (a.rho[i] - b.rho[i]).cwiseAbs().maxCoeff());
    return d;
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

void report(std::ostream& os, bool ok, const std::string& what)
{
    os << (ok ? "PASS " : "FAIL ") << what << '\n';
}

} // namespace

std::filesystem::path run_fit(const Scenario& s, const RunContext& ctx)
{
    if (!s.bath)
        throw ValidationError("bath: fit needs a spectral density, not a decomposition file");
    const FitResult fit = fit_bath(*s.bath, s.numerics.fit);
    const auto& d = fit.decomposition;
    const auto times = s.outputs.times.values();
    const auto errs = decomposition_errors(d, *s.bath, times, fit.omega);

    json doc = to_json(d);
    doc["units"] = s.lab_units ? "rad/ps" : "model";
    const auto json_path = out_path(s, ctx, "_decomposition.json");
    write_json(json_path, doc);
    log_of(ctx) << "wrote " << json_path.string() << '\n';

    json header = {{"scenario", s.resolved},
                   {"eps_S", errs.eps_S},
                   {"eps_S_relative", errs.eps_S / fit.spectrum_l1},
                   {"moment_mismatch_relative", d.moment_mismatch / d.sigma2},
                   {"N", d.N()},
                   {"aaa_order", fit.rational.order()}};
    Table t;
    t.add("time", times);
    t.add("eps_C", errs.eps_C);
    emit(s, ctx, out_path(s, ctx, "_fit_errors.csv"), t, header, "|C - C_fit|");

    Table sp;
    std::vector<double> w, fitted;
    for (double x : fit.omega) {
        w.push_back(x / s.energy_scale);
        fitted.push_back(d.spectrum(x));
    }
    sp.add("omega", std::move(w));
    sp.add("S", fit.spectrum);
    sp.add("S_fit", std::move(fitted));
    emit(s, ctx, out_path(s, ctx, "_fit_spectrum.csv"), sp, header, "power spectrum");
    log_of(ctx) << "N = " << d.N() << ", eps_S/int|S| = " << fmt(errs.eps_S / fit.spectrum_l1)
                << ", |sum w - sigma^2|/sigma^2 = " << fmt(d.moment_mismatch / d.sigma2) << '\n';
    return json_path;
}

std::filesystem::path run_simulate(const Scenario& s, const RunContext& ctx)
{
    const std::string backend = ctx.backend.value_or(s.numerics.backend);
    if (backend == "finite_a") {
        if (s.numerics.a_values.empty())
            throw ValidationError("numerics.a_values: finite_a needs at least one value");
        const auto ref = simulate_once(s, "ppm", -1, 0.0);
        const auto& av = s.numerics.a_values;
        std::vector<TrajectoryRun> runs(av.size());
        bench::parallel_for(av.size(), ctx.threads, [&](std::size_t k) { runs[k] = simulate_once(s, backend, -1, av[k]); });
        Table summary;
        std::vector<double> a_user, dist;
        for (std::size_t k = 0; k < av.size(); ++k) {
            a_user.push_back(av[k] / s.energy_scale);
            dist.push_back(rho_distance(runs[k].traj, ref.traj));
            json header = {{"scenario", s.resolved}, {"a", a_user.back()}, {"generator", runs[k].meta},
                           {"diagnostics", diagnostics_of(runs[k].traj)}};
            emit(s, ctx, out_path(s, ctx, "_finite_a_" + std::to_string(k) + ".csv"), runs[k].table, header,
                 "finite a = " + fmt(a_user.back()));
            log_of(ctx) << "a = " << a_user.back() << ": sup distance to purified " << fmt(dist.back()) << '\n';
        }
        summary.add("a", a_user);
        summary.add("distance_to_purified", dist);
        const auto path = out_path(s, ctx, "_finite_a.csv");
        emit(s, ctx, path, summary, {{"scenario", s.resolved}, {"reference", ref.meta}}, "finite-a distance");
        return path;
    }

    const auto run = simulate_once(s, backend, -1, 0.0);
    json header = {{"scenario", s.resolved}, {"generator", run.meta}, {"diagnostics", diagnostics_of(run.traj)}};
    if (run.traj.stats.unstable)
        log_of(ctx) << "warning: integration flagged unstable, trajectory is partial\n";
    const auto path = out_path(s, ctx, "_trajectory.csv");
    if (ctx.convergence && s.coupling && backend != "exact_cavity") {
        const int cap2 = 2 * s.numerics.cap;
        json cert = {{"cap", s.numerics.cap}, {"doubled_cap", cap2}, {"tolerance", s.numerics.convergence_tol}};
        try {
            const auto run2 = simulate_once(s, backend, cap2, 0.0);
            const double d = run2.traj.stats.unstable ? INFINITY : table_distance(run.table, run2.table);
            cert["max_change"] = std::isfinite(d) ? json(d) : json("unstable");
            cert["converged"] = d < s.numerics.convergence_tol;
        } catch (const Error& e) {
            cert["converged"] = false;
            cert["error"] = e.what();
        }
        header["convergence"] = cert;
        write_json(out_path(s, ctx, "_convergence.json"), cert);
        log_of(ctx) << "convergence certificate: " << cert.dump() << '\n';
    }
    emit(s, ctx, path, run.table, header, s.name);
    return path;
}

std::filesystem::path run_steady(const Scenario& s, const RunContext& ctx)
{
    const std::string backend = ctx.backend.value_or(s.numerics.backend);
    std::vector<double> a2 = s.outputs.sweep_alpha2, a3 = s.outputs.sweep_alpha3;
    const auto base = s.coupling ? s.coupling->coefficients() : std::vector<double>{0.0};
    const double scale = s.energy_scale;
    if (a2.empty())
        a2.push_back(base.size() > 1 ? base[1] * scale : 0.0);
    if (a3.empty())
        a3.push_back(base.size() > 2 ? base[2] * scale * scale : 0.0);
    const auto cols = observable_columns(s);

    struct Point {
        std::vector<double> values;
        bool ok = false;
        std::string error;
        double eigenvalue = NAN;
    };
    auto solve_at = [&](double x2, double x3, int cap) {
        Point p;
        Scenario sc = s;
        const bool sweep = !s.outputs.sweep_alpha2.empty() || !s.outputs.sweep_alpha3.empty();
        if (sweep) {
            std::vector<double> al{base.empty() ? 0.0 : base[0], x2 / scale, x3 / (scale * scale)};
            sc.coupling.reset();
            if (std::any_of(al.begin(), al.end(), [](double v) { return v != 0.0; }))
                sc.coupling = CouplingPolynomial(al);
        }
        try {
            const auto gen = make_generator(sc, backend, cap, 0.0);
            const auto ss = steady_state(*gen);
            for (const auto& c : cols)
                p.values.push_back(c.eval(ss.rho_s));
            p.eigenvalue = std::abs(ss.eigenvalue);
            p.ok = true;
        } catch (const Error& e) {
            p.error = e.what();
            p.values.assign(cols.size(), NAN);
        }
        return p;
    };

    std::vector<Point> pts(a2.size() * a3.size());
    bench::parallel_for(pts.size(), ctx.threads,
                        [&](std::size_t k) { pts[k] = solve_at(a2[k / a3.size()], a3[k % a3.size()], -1); });
    Table t;
    std::vector<double> c2, c3, status;
    json failures = json::array();
    for (std::size_t k = 0; k < pts.size(); ++k) {
        c2.push_back(a2[k / a3.size()]);
        c3.push_back(a3[k % a3.size()]);
        status.push_back(pts[k].ok ? 0.0 : 1.0);
        if (!pts[k].ok)
            failures.push_back({{"alpha2", c2.back()}, {"alpha3", c3.back()}, {"error", pts[k].error}});
    }
    t.add("alpha2", c2);
    t.add("alpha3", c3);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        std::vector<double> v;
        for (const auto& p : pts)
            v.push_back(p.values[c]);
        t.add(cols[c].name, std::move(v));
    }
    t.add("failed", status);
    json header = {{"scenario", s.resolved}, {"failures", failures}};
    if (ctx.convergence) {
        double worst = 0.0;
        std::vector<Point> pts2(pts.size());
        bench::parallel_for(pts.size(), ctx.threads, [&](std::size_t k) {
            pts2[k] = solve_at(a2[k / a3.size()], a3[k % a3.size()], 2 * s.numerics.cap);
        });
        for (std::size_t k = 0; k < pts.size(); ++k)
            for (std::size_t c = 0; c < cols.size(); ++c)
                if (pts[k].ok) {
                    const double d = std::abs(pts[k].values[c] - pts2[k].values[c]);
                    worst = std::max(worst, std::isfinite(d) ? d : INFINITY);
                }
        json cert = {{"cap", s.numerics.cap}, {"doubled_cap", 2 * s.numerics.cap},
                     {"tolerance", s.numerics.convergence_tol}, {"converged", worst < s.numerics.convergence_tol}};
        cert["max_change"] = std::isfinite(worst) ? json(worst) : json("unstable");
        header["convergence"] = cert;
        write_json(out_path(s, ctx, "_convergence.json"), cert);
        log_of(ctx) << "convergence certificate: " << cert.dump() << '\n';
    }
    if (!failures.empty())
        log_of(ctx) << failures.size() << " grid point(s) failed, see the file header\n";
    const auto path = out_path(s, ctx, "_steady.csv");
    write_csv(path, t, header);
    log_of(ctx) << "wrote " << path.string() << '\n';
    return path;
}

std::filesystem::path run_spectrum(const Scenario& s, const RunContext& ctx)
{
    const std::string backend = ctx.backend.value_or(s.numerics.backend);
    const auto gen = make_generator(s, backend, -1, 0.0);
    const int dim = s.system.dim();
    const Matrix apply = parse_operator(json(s.outputs.apply), dim, "outputs.apply");
    const Matrix measure = parse_operator(json(s.outputs.measure), dim, "outputs.measure");

    double tau_max = s.outputs.tau_max;
    if (!(tau_max > 0.0)) {
        std::optional<PseudomodeSet> modes;
        if (s.coupling && backend != "exact_cavity")
            modes = build_purified_modes(scenario_decomposition(s));
        tau_max = bench::default_tau_max(s.system, modes ? &*modes : nullptr);
    }
    bench::SpectrumOptions so;
    so.ode = ode_of(s);
    so.tau_points = s.outputs.tau_points;
    const auto w_user = s.outputs.frequencies.values();
    for (double w : w_user)
        so.omega.push_back(w * s.energy_scale);
    const auto run = bench::emission_spectrum(*gen, apply, measure, tau_max, so);

    json header = {{"scenario", s.resolved},
                   {"generator", metadata_of(*gen)},
                   {"tau_max", tau_max},
                   {"tau_points", so.tau_points},
                   {"offset", {run.spectrum.offset.real(), run.spectrum.offset.imag()}},
                   {"decay_residual", run.spectrum.residual},
                   {"steady_method", run.steady.method},
                   {"steady_eigenvalue", std::abs(run.steady.eigenvalue)},
                   {"convention", "S(w) = Re int_0^tau_max dtau e^{i w tau} (corr(tau) - offset)"}};
    Table c;
    std::vector<double> re, im;
    for (const auto& z : run.corr) {
        re.push_back(z.real());
        im.push_back(z.imag());
    }
    c.add("tau", run.tau);
    c.add("corr_re", std::move(re));
    c.add("corr_im", std::move(im));
    write_csv(out_path(s, ctx, "_correlation.csv"), c, header);

    Table t;
    t.add("omega", w_user);
    t.add("S", run.spectrum.values);
    const auto path = out_path(s, ctx, "_spectrum.csv");
    emit(s, ctx, path, t, header, "emission spectrum");
    return path;
}

bool run_benchmark(const std::string& which, const RunContext& ctx)
{
    if (which != "fig1" && which != "fig2" && which != "fig3" && which != "all")
        throw ValidationError("benchmark: expected fig1, fig2, fig3 or all");
    auto& os = log_of(ctx);
    bool ok = true;
    if (which == "fig1" || which == "all") {
        std::vector<bench::CavityComparison> res(bench::kCavityCombos.size());
        bench::parallel_for(res.size(), ctx.threads,
                            [&](std::size_t k) { res[k] = bench::compare_with_cavity(bench::kCavityCombos[k]); });
        for (const auto& r : res) {
            std::ostringstream tag;
            tag << "alpha=(" << r.alpha[0] << "," << r.alpha[1] << "," << r.alpha[2] << ")";
            Table t;
            t.add("time", r.times);
            t.add("population_ppm", r.population_ppm);
            t.add("population_exact", r.population_exact);
            t.add("entropy_ppm", r.entropy_ppm);
            t.add("entropy_exact", r.entropy_exact);
            write_csv(ctx.out_dir / ("fig1_" + std::to_string(&r - res.data()) + ".csv"), t,
                      {{"alpha", r.alpha}, {"population_error", r.population_error}, {"entropy_error", r.entropy_error}});
            const bool pass = !r.unstable && r.population_error <= 1e-3 && r.entropy_error <= 1e-3;
            report(os, pass, "fig1 " + tag.str() + " population err " + fmt(r.population_error) + ", entropy err "
                                 + fmt(r.entropy_error) + " (<= 1e-3)");
            ok = ok && pass;
        }
    }
    if (which == "fig2" || which == "all") {
        const auto a2 = bench::linspace(-0.4, 0.4, 9);
        const auto a3 = bench::linspace(-0.15, 0.15, 7);
        const auto pts = bench::steady_grid(a2, a3, 12, ctx.threads);
        Table t;
        std::vector<double> c2, c3, pop, ent, failed;
        for (const auto& p : pts) {
            c2.push_back(p.alpha2);
            c3.push_back(p.alpha3);
            pop.push_back(p.population);
            ent.push_back(p.entropy);
            failed.push_back(p.status == "ok" ? 0.0 : 1.0);
        }
        t.add("alpha2", c2);
        t.add("alpha3", c3);
        t.add("population", pop);
        t.add("entropy", ent);
        t.add("failed", failed);
        write_csv(ctx.out_dir / "fig2_steady.csv", t, {{"cap", 12}});
        const double plus[] = {0.4}, minus[] = {-0.4}, zero[] = {0.0};
        const auto p = bench::steady_grid(plus, zero, 12)[0];
        const auto m = bench::steady_grid(minus, zero, 12)[0];
        const double d = std::max(std::abs(p.population - m.population), std::abs(p.entropy - m.entropy));
        const bool pass = p.status == "ok" && m.status == "ok" && d <= 1e-8;
        report(os, pass, "fig2 alpha2 sign symmetry, steady difference " + fmt(d) + " (<= 1e-8)");
        ok = ok && pass;
    }
    if (which == "fig3" || which == "all") {
        const auto rep = bench::run_mollow();
        Table t;
        t.add("omega_meV", rep.omega_mev);
        t.add("S_no_phonons", rep.bare);
        t.add("S_linear_phonons", rep.phonon);
        write_csv(ctx.out_dir / "fig3_spectra.csv", t, {{"decomposition", to_json(rep.decomposition)}});
        report(os, rep.triplet,
               "fig3 Mollow peaks at " + fmt(rep.bare_peaks_mev[0]) + ", " + fmt(rep.bare_peaks_mev[1]) + ", "
                   + fmt(rep.bare_peaks_mev[2]) + " meV (within 0.01 of 0, +-1)");
        report(os, rep.asymmetry_matches,
               "fig3 sideband asymmetry S_rf(+)=" + fmt(rep.sideband_plus) + " S_rf(-)=" + fmt(rep.sideband_minus)
                   + ", S(W)-S(-W)=" + fmt(rep.bath_asymmetry));
        ok = ok && rep.triplet && rep.asymmetry_matches;
    }
    return ok;
}

} // namespace ppm
