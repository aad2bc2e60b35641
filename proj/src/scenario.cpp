#include "ppm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ppm/io.hpp"
#include "ppm/units.hpp"

namespace ppm {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& field)
{
    if (!j.is_object())
        throw ValidationError(field + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
        if (!ok.count(key))
            throw ValidationError(field + "." + key + ": unknown field");
}

template <class T>
T get(const json& j, const char* key, T fallback, const std::string& field)
{
    if (!j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(field + "." + key + ": wrong type");
    }
}

template <class T>
T require(const json& j, const char* key, const std::string& field)
{
    if (!j.contains(key))
        throw ValidationError(field + "." + key + ": required field missing");
    return get<T>(j, key, T{}, field);
}

cplx parse_entry(const json& e, const std::string& field)
{
    if (e.is_number())
        return e.get<double>();
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
        return {e[0].get<double>(), e[1].get<double>()};
    throw ValidationError(field + ": matrix entries must be numbers or [re, im] pairs");
}

Matrix named_operator(const std::string& name, int dim, const std::string& field)
{
    if (dim != 2)
        throw ValidationError(field + ": named operators need a two-level system");
    Matrix m = Matrix::Zero(2, 2);
    if (name == "sigma_x")
        m << 0, 1, 1, 0;
    else if (name == "sigma_y")
        m << 0, -I, I, 0;
    else if (name == "sigma_z")
        m << 1, 0, 0, -1;
    else if (name == "sigma_plus")
        m(0, 1) = 1.0;
    else if (name == "sigma_minus")
        m(1, 0) = 1.0;
    else if (name == "excited" || name == "population")
        m(0, 0) = 1.0;
    else if (name == "ground")
        m(1, 1) = 1.0;
    else if (name == "identity")
        m.setIdentity();
    else
        throw ValidationError(field + ": unknown operator '" + name + "'");
    return m;
}

Matrix density_from(const json& j, int dim, const std::string& field)
{
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "excited" || name == "ground")
            return named_operator(name, dim, field);
        if (name == "mixed")
            return Matrix::Identity(dim, dim) / static_cast<double>(dim);
        throw ValidationError(field + ": unknown state '" + name + "'");
    }
    if (j.is_object() && j.contains("vector")) {
        check_keys(j, {"vector"}, field);
        const auto& v = j["vector"];
        if (!v.is_array() || static_cast<int>(v.size()) != dim)
            throw ValidationError(field + ".vector: expected " + std::to_string(dim) + " entries");
        Vector psi(dim);
        for (int i = 0; i < dim; ++i)
            psi[i] = parse_entry(v[static_cast<std::size_t>(i)], field + ".vector");
        if (psi.norm() == 0.0)
            throw ValidationError(field + ".vector: zero vector");
        psi.normalize();
        return psi * psi.adjoint();
    }
    return parse_operator(j, dim, field);
}

int infer_dim(const json& sys)
{
    const json& h = sys.at("hamiltonian");
    if (h.is_object() && h.contains("matrix") && h["matrix"].is_array())
        return static_cast<int>(h["matrix"].size());
    return 2;
}

BathSpec parse_bath(const json& b, double scale, bool lab, const std::filesystem::path& base)
{
    const std::string field = "bath";
    const auto type = require<std::string>(b, "type", field);
    BathSpec bath;
    auto beta_of = [&]() {
        if (b.contains("beta")) {
            if (lab)
                throw ValidationError("bath.beta: lab units take a temperature in kelvin");
            const double beta = get<double>(b, "beta", 0.0, field);
            if (!(beta > 0.0))
                throw ValidationError("bath.beta: must be positive");
            return beta;
        }
        const double t = get<double>(b, "temperature", 0.0, field);
        if (t < 0.0)
            throw ValidationError("bath.temperature: must be non-negative");
        if (t == 0.0)
            return std::numeric_limits<double>::infinity();
        return lab ? units::beta_ps_from_kelvin(t) : 1.0 / t;
    };
    if (type == "super_ohmic") {
        check_keys(b, {"type", "alpha_p", "omega_b", "temperature", "beta"}, field);
        bath.density = SuperOhmic{require<double>(b, "alpha_p", field), require<double>(b, "omega_b", field) * scale};
        bath.beta = beta_of();
    } else if (type == "single_mode") {
        check_keys(b, {"type", "lambda", "nu", "gamma"}, field);
        bath.density = SingleMode{require<double>(b, "lambda", field) * scale, require<double>(b, "nu", field) * scale,
                                  require<double>(b, "gamma", field) * scale};
    } else if (type == "tabulated") {
        check_keys(b, {"type", "file", "temperature", "beta"}, field);
        const auto raw = Tabulated::from_csv(base / require<std::string>(b, "file", field));
        auto w = raw.omega();
        auto jv = raw.density();
        for (auto& x : w)
            x *= scale;
        for (auto& x : jv)
            x *= scale;
        bath.density = Tabulated(std::move(w), std::move(jv));
        bath.beta = beta_of();
    } else {
        throw ValidationError("bath.type: expected super_ohmic, single_mode or tabulated, got '" + type + "'");
    }
    bath.validate();
    return bath;
}

json grid_json(const Grid& g) { return {{"min", g.min}, {"max", g.max}, {"points", g.points}}; }

Grid parse_grid(const json& j, Grid fallback, const std::string& field)
{
    check_keys(j, {"min", "max", "end", "points"}, field);
    Grid g = fallback;
    g.min = get<double>(j, "min", g.min, field);
    g.max = get<double>(j, "max", get<double>(j, "end", g.max, field), field);
    g.points = get<int>(j, "points", g.points, field);
    if (g.points < 2 || !(g.max > g.min))
        throw ValidationError(field + ": need max > min and at least 2 points");
    return g;
}

} // namespace

std::vector<double> Grid::values() const
{
    std::vector<double> v(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        v[static_cast<std::size_t>(i)] = min + (max - min) * i / (points - 1);
    return v;
}

Matrix parse_operator(const json& j, int dim, const std::string& field)
{
    if (j.is_string())
        return named_operator(j.get<std::string>(), dim, field);
    if (!j.is_object() || j.size() != 1)
        throw ValidationError(field + ": expected one of {pauli, named, matrix}");
    if (j.contains("named"))
        return named_operator(get<std::string>(j, "named", "", field), dim, field + ".named");
    if (j.contains("pauli")) {
        if (dim != 2)
            throw ValidationError(field + ".pauli: Pauli coefficients need a two-level system");
        const json& p = j["pauli"];
        check_keys(p, {"i", "x", "y", "z"}, field + ".pauli");
        Matrix m = Matrix::Zero(2, 2);
        for (const auto& [k, v] : p.items()) {
            if (!v.is_number())
                throw ValidationError(field + ".pauli." + k + ": expected a number");
            const Matrix base = k == "i" ? Matrix(Matrix::Identity(2, 2)) : named_operator("sigma_" + k, 2, field);
            m += v.get<double>() * base;
        }
        return m;
    }
    if (j.contains("matrix")) {
        const json& rows = j["matrix"];
        if (!rows.is_array() || static_cast<int>(rows.size()) != dim)
            throw ValidationError(field + ".matrix: expected " + std::to_string(dim) + " rows");
        Matrix m(dim, dim);
        for (int r = 0; r < dim; ++r) {
            const json& row = rows[static_cast<std::size_t>(r)];
            if (!row.is_array() || static_cast<int>(row.size()) != dim)
                throw ValidationError(field + ".matrix: row " + std::to_string(r) + " needs " + std::to_string(dim)
                                      + " entries");
            for (int c = 0; c < dim; ++c)
                m(r, c) = parse_entry(row[static_cast<std::size_t>(c)], field + ".matrix");
        }
        return m;
    }
    throw ValidationError(field + ": expected one of {pauli, named, matrix}");
}

Scenario parse_scenario(const json& j, const std::filesystem::path& base_dir)
{
    check_keys(j, {"name", "units", "system", "bath", "coupling", "numerics", "outputs"}, "scenario");
    Scenario s;
    s.name = get<std::string>(j, "name", "scenario", "scenario");
    const auto units_name = get<std::string>(j, "units", "model", "scenario");
    if (units_name != "model" && units_name != "lab")
        throw ValidationError("scenario.units: expected 'model' or 'lab'");
    s.lab_units = units_name == "lab";
    s.energy_scale = s.lab_units ? units::mev_to_rad_per_ps(1.0) : 1.0;
    const double scale = s.energy_scale;

    if (!j.contains("system"))
        throw ValidationError("scenario.system: required block missing");
    const json& sys = j["system"];
    check_keys(sys, {"hamiltonian", "coupling", "collapses", "initial"}, "system");
    if (!sys.contains("hamiltonian") || !sys.contains("coupling"))
        throw ValidationError("system: hamiltonian and coupling are required");
    const int dim = infer_dim(sys);
    s.system.hamiltonian = parse_operator(sys["hamiltonian"], dim, "system.hamiltonian") * scale;
    s.system.coupling = parse_operator(sys["coupling"], dim, "system.coupling");
    if (sys.contains("collapses")) {
        if (!sys["collapses"].is_array())
            throw ValidationError("system.collapses: expected a list");
        for (std::size_t k = 0; k < sys["collapses"].size(); ++k) {
            const json& c = sys["collapses"][k];
            const std::string f = "system.collapses[" + std::to_string(k) + "]";
            check_keys(c, {"op", "rate"}, f);
            Collapse col{parse_operator(c.at("op"), dim, f + ".op"), require<double>(c, "rate", f) * scale};
            if (col.rate < 0.0)
                throw ValidationError(f + ".rate: must be non-negative");
            s.system.collapses.push_back(std::move(col));
        }
    }
    s.system.rho0 = density_from(sys.value("initial", json("excited")), dim, "system.initial");
    try {
        s.system.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("system: ") + e.what());
    }

    if (!j.contains("bath"))
        throw ValidationError("scenario.bath: required block missing");
    const json& b = j["bath"];
    if (b.contains("decomposition")) {
        check_keys(b, {"decomposition"}, "bath");
        const auto path = base_dir / get<std::string>(b, "decomposition", "", "bath");
        try {
            s.decomposition = decomposition_from_json(read_json(path));
        } catch (const json::exception& e) {
            throw ValidationError("bath.decomposition: " + std::string(e.what()));
        }
    } else {
        s.bath = parse_bath(b, scale, s.lab_units, base_dir);
    }

    std::vector<double> alpha{1.0};
    if (j.contains("coupling")) {
        check_keys(j["coupling"], {"alpha"}, "coupling");
        alpha = get<std::vector<double>>(j["coupling"], "alpha", alpha, "coupling");
    }
    for (std::size_t n = 0; n < alpha.size(); ++n)
        alpha[n] *= std::pow(scale, -static_cast<double>(n));
    if (std::any_of(alpha.begin(), alpha.end(), [](double a) { return a != 0.0; }))
        s.coupling = CouplingPolynomial(alpha);

    const json num = j.value("numerics", json::object());
    check_keys(num, {"backend", "cap", "cutoff", "total_cap", "cavity_cap", "rtol", "atol", "a_values",
                     "convergence_tol", "fit"}, "numerics");
    Numerics& n = s.numerics;
    n.backend = get<std::string>(num, "backend", n.backend, "numerics");
    if (n.backend != "ppm" && n.backend != "finite_a" && n.backend != "heom" && n.backend != "exact_cavity")
        throw ValidationError("numerics.backend: expected ppm, finite_a, heom or exact_cavity");
    n.cap = get<int>(num, "cap", n.cap, "numerics");
    n.cutoff = get<int>(num, "cutoff", n.cutoff, "numerics");
    n.total_cap = get<int>(num, "total_cap", n.total_cap, "numerics");
    n.cavity_cap = get<int>(num, "cavity_cap", n.cavity_cap, "numerics");
    n.rtol = get<double>(num, "rtol", n.rtol, "numerics");
    n.atol = get<double>(num, "atol", n.atol, "numerics");
    n.a_values = get<std::vector<double>>(num, "a_values", n.a_values, "numerics");
    for (auto& a : n.a_values)
        a *= scale;
    n.convergence_tol = get<double>(num, "convergence_tol", n.convergence_tol, "numerics");
    if (n.cap < 0 || !(n.rtol > 0.0) || !(n.atol > 0.0))
        throw ValidationError("numerics: cap must be >= 0 and tolerances positive");
    if (num.contains("fit")) {
        const json& f = num["fit"];
        check_keys(f, {"omega_min", "omega_max", "samples", "tol", "max_order", "n_terms"}, "numerics.fit");
        n.fit.omega_min = get<double>(f, "omega_min", n.fit.omega_min, "numerics.fit") * scale;
        n.fit.omega_max = get<double>(f, "omega_max", n.fit.omega_max, "numerics.fit") * scale;
        n.fit.samples = get<int>(f, "samples", n.fit.samples, "numerics.fit");
        n.fit.tol = get<double>(f, "tol", n.fit.tol, "numerics.fit");
        n.fit.max_order = get<int>(f, "max_order", n.fit.max_order, "numerics.fit");
        n.fit.n_terms = get<int>(f, "n_terms", n.fit.n_terms, "numerics.fit");
    }

    const json out = j.value("outputs", json::object());
    check_keys(out, {"observables", "times", "frequencies", "tau", "apply", "measure", "sweep", "prefix", "svg"},
               "outputs");
    Outputs& o = s.outputs;
    o.observables = {"population", "entropy"};
    if (dim != 2)
        o.observables = {"entropy"};
    if (out.contains("observables")) {
        o.observables.clear();
        if (!out["observables"].is_array())
            throw ValidationError("outputs.observables: expected a list");
        for (std::size_t k = 0; k < out["observables"].size(); ++k) {
            const json& e = out["observables"][k];
            const std::string f = "outputs.observables[" + std::to_string(k) + "]";
            if (e.is_string()) {
                const auto name = e.get<std::string>();
                if (name != "entropy" && name != "trace" && name != "purity")
                    (void)named_operator(name, dim, f);
                o.observables.push_back(name);
            } else {
                check_keys(e, {"name", "op"}, f);
                o.custom_observables.emplace_back(require<std::string>(e, "name", f),
                                                  parse_operator(e.at("op"), dim, f + ".op"));
            }
        }
    }
    if (out.contains("times"))
        o.times = parse_grid(out["times"], o.times, "outputs.times");
    if (out.contains("frequencies"))
        o.frequencies = parse_grid(out["frequencies"], o.frequencies, "outputs.frequencies");
    if (out.contains("tau")) {
        check_keys(out["tau"], {"max", "points"}, "outputs.tau");
        o.tau_max = get<double>(out["tau"], "max", o.tau_max, "outputs.tau");
        o.tau_points = get<int>(out["tau"], "points", o.tau_points, "outputs.tau");
        if (o.tau_points < 2)
            throw ValidationError("outputs.tau.points: need at least 2");
    }
    o.apply = get<std::string>(out, "apply", o.apply, "outputs");
    o.measure = get<std::string>(out, "measure", o.measure, "outputs");
    (void)named_operator(o.apply, dim, "outputs.apply");
    (void)named_operator(o.measure, dim, "outputs.measure");
    if (out.contains("sweep")) {
        check_keys(out["sweep"], {"alpha2", "alpha3"}, "outputs.sweep");
        o.sweep_alpha2 = get<std::vector<double>>(out["sweep"], "alpha2", {}, "outputs.sweep");
        o.sweep_alpha3 = get<std::vector<double>>(out["sweep"], "alpha3", {}, "outputs.sweep");
    }
    o.prefix = get<std::string>(out, "prefix", s.name, "outputs");
    o.svg = get<bool>(out, "svg", o.svg, "outputs");

    // Resolved echo, in the user's units.
    s.resolved = j;
    s.resolved["name"] = s.name;
    s.resolved["units"] = units_name;
    s.resolved["coupling"] = {{"alpha", get<std::vector<double>>(j.value("coupling", json::object()), "alpha",
                                                                  {1.0}, "coupling")}};
    json rn = {{"backend", n.backend}, {"cap", n.cap}, {"cutoff", n.cutoff > 0 ? n.cutoff : n.cap + 1},
               {"total_cap", n.total_cap}, {"cavity_cap", n.cavity_cap}, {"rtol", n.rtol}, {"atol", n.atol},
               {"convergence_tol", n.convergence_tol}};
    rn["a_values"] = get<std::vector<double>>(num, "a_values", {}, "numerics");
    rn["fit"] = {{"omega_min", n.fit.omega_min / scale}, {"omega_max", n.fit.omega_max / scale},
                 {"samples", n.fit.samples}, {"tol", n.fit.tol}, {"max_order", n.fit.max_order},
                 {"n_terms", n.fit.n_terms}};
    s.resolved["numerics"] = rn;
    json ro = {{"observables", out.value("observables", json(o.observables))}, {"times", grid_json(o.times)},
               {"frequencies", grid_json(o.frequencies)}, {"tau", {{"max", o.tau_max}, {"points", o.tau_points}}},
               {"apply", o.apply}, {"measure", o.measure}, {"prefix", o.prefix}, {"svg", o.svg}};
    ro["sweep"] = {{"alpha2", o.sweep_alpha2}, {"alpha3", o.sweep_alpha3}};
    s.resolved["outputs"] = ro;
    if (!sys.contains("initial"))
        s.resolved["system"]["initial"] = "excited";
    return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    return parse_scenario(read_json(path), path.has_parent_path() ? path.parent_path() : ".");
}

ExponentialDecomposition scenario_decomposition(const Scenario& s)
{
    if (s.decomposition)
        return *s.decomposition;
    if (!s.bath)
        throw ValidationError("bath: neither a spectral density nor a decomposition is given");
    if (const auto* m = std::get_if<SingleMode>(&s.bath->density))
        return single_mode_decomposition(m->lambda, m->nu, m->gamma);
    return fit_bath(*s.bath, s.numerics.fit).decomposition;
}

std::unique_ptr<LinearGenerator> make_generator(const Scenario& s, const std::string& backend, int cap, double a)
{
    if (cap < 0)
        cap = s.numerics.cap;
    if (!s.coupling)
        return std::make_unique<AssembledGenerator>(build_system_generator(s.system));
    const int ds = s.system.dim();
    if (backend == "exact_cavity") {
        const SingleMode* m = s.bath ? std::get_if<SingleMode>(&s.bath->density) : nullptr;
        if (!m)
            throw ValidationError("numerics.backend: exact_cavity needs a single_mode bath");
        return std::make_unique<AssembledGenerator>(
            build_exact_cavity_generator(s.system, *m, *s.coupling, s.numerics.cavity_cap));
    }
    const auto d = scenario_decomposition(s);
    if (backend == "finite_a") {
        if (!(a > 0.0))
            throw ValidationError("numerics.a_values: finite_a needs a > 0");
        const auto modes = build_finite_a_modes(d, a);
        auto basis = std::make_shared<const EnrBasis>(ds, modes.mode_count(), s.numerics.cutoff, cap);
        auto gen = build_finite_a_generator(s.system, modes, *s.coupling, basis);
        return std::make_unique<AssembledGenerator>(std::move(gen));
    }
    const auto modes = build_purified_modes(d);
    if (backend == "heom")
        return std::make_unique<HeomHierarchy>(s.system, modes, *s.coupling, cap, s.numerics.cutoff,
                                               s.numerics.total_cap);
    if (backend == "ppm") {
        auto basis = std::make_shared<const EnrBasis>(ds, modes.mode_count(), s.numerics.cutoff, cap);
        auto gen = build_ppm_generator(s.system, modes, *s.coupling, basis);
        check_instability(gen);
        return std::make_unique<AssembledGenerator>(std::move(gen));
    }
    throw ValidationError("numerics.backend: unknown backend '" + backend + "'");
}

} // namespace ppm
