#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ppm/io.hpp"
#include "ppm/runner.hpp"
#include "ppm/scenario.hpp"
#include "ppm/units.hpp"

using namespace ppm;
namespace fs = std::filesystem;

namespace {

nlohmann::json cavity_scenario()
{
    return nlohmann::json::parse(R"({
        "name": "t",
        "system": {"hamiltonian": {"pauli": {"z": 0.25}}, "coupling": {"pauli": {"x": 1.0}}},
        "bath": {"type": "single_mode", "lambda": 0.3, "nu": 0.5, "gamma": 0.1},
        "coupling": {"alpha": [1.0]},
        "numerics": {"cap": 4},
        "outputs": {"observables": ["population"], "times": {"end": 5, "points": 11}}
    })");
}

std::string error_of(const nlohmann::json& j)
{
    try {
        parse_scenario(j);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::ostringstream quiet;

RunContext in(const fs::path& dir) { return {dir, 1, std::nullopt, false, &quiet}; }

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("ppm_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("scenario defaults and operator parsing")
{
    const auto s = parse_scenario(cavity_scenario());
    CHECK(s.name == "t");
    CHECK(s.numerics.backend == "ppm");
    CHECK(s.numerics.cap == 4);
    CHECK(s.system.hamiltonian(0, 0) == cplx(0.25));
    CHECK(s.system.coupling(0, 1) == cplx(1.0));
    CHECK(s.system.rho0(0, 0) == cplx(1.0));
    REQUIRE(s.coupling);
    CHECK(s.coupling->degree() == 1);
    CHECK(s.resolved.contains("numerics"));

    const Matrix m = parse_operator(nlohmann::json::parse(R"({"matrix": [[1, [0, 2]], [[0, -2], 3]]})"), 2, "op");
    CHECK(m(0, 1) == cplx(0.0, 2.0));
    CHECK(m(1, 1) == cplx(3.0));
    CHECK(parse_operator(nlohmann::json::parse(R"({"named": "sigma_minus"})"), 2, "op")(1, 0) == cplx(1.0));
}

TEST_CASE("validation errors name the offending field")
{
    auto j = cavity_scenario();
    j["numerics"]["capp"] = 3;
    CHECK(error_of(j).find("numerics.capp") != std::string::npos);

    j = cavity_scenario();
    j["bath"]["type"] = "ohmic";
    CHECK(error_of(j).find("bath.type") != std::string::npos);

    j = cavity_scenario();
    j["system"]["hamiltonian"] = {{"matrix", {{1, 0, 0}, {0, 1, 0}}}};
    CHECK(error_of(j).find("system.hamiltonian") != std::string::npos);

    j = cavity_scenario();
    j["numerics"]["backend"] = "magic";
    CHECK(error_of(j).find("numerics.backend") != std::string::npos);

    j = cavity_scenario();
    j.erase("bath");
    CHECK(error_of(j).find("bath") != std::string::npos);

    j = cavity_scenario();
    j["bath"]["gamma"] = -1.0;
    CHECK_FALSE(error_of(j).empty());
}

TEST_CASE("lab units convert meV and kelvin")
{
    auto j = nlohmann::json::parse(R"({
        "units": "lab",
        "system": {"hamiltonian": {"pauli": {"x": 0.5}}, "coupling": {"named": "excited"},
                   "collapses": [{"op": {"named": "sigma_minus"}, "rate": 0.1}]},
        "bath": {"type": "super_ohmic", "alpha_p": 0.08, "omega_b": 1.0, "temperature": 4.0},
        "coupling": {"alpha": [1.0, 0.05]}
    })");
    const auto s = parse_scenario(j);
    const double scale = 1.0 / units::hbar_mev_ps;
    CHECK(s.lab_units);
    CHECK(s.energy_scale == doctest::Approx(scale));
    CHECK(s.system.hamiltonian(0, 1).real() == doctest::Approx(0.5 * scale));
    CHECK(s.system.collapses[0].rate == doctest::Approx(0.1 * scale));
    CHECK(s.bath->beta == doctest::Approx(units::beta_ps_from_kelvin(4.0)));
    CHECK((*s.coupling)[2] == doctest::Approx(0.05 / scale));
}

TEST_CASE("zero coupling evolves the bare system and leaves observables flat")
{
    auto j = cavity_scenario();
    j["coupling"]["alpha"] = {0.0};
    const auto s = parse_scenario(j);
    CHECK_FALSE(s.coupling);
    const auto dir = scratch("zero");
    const auto path = run_simulate(s, in(dir));
    const auto t = read_csv(path);
    REQUIRE(t.columns.at(1) == "population");
    for (double v : t.data[1])
        CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("CSV output is deterministic and round-trips")
{
    const auto dir = scratch("csv");
    const auto s = parse_scenario(cavity_scenario());
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");
    const auto a = run_simulate(s, in(dir / "a"));
    const auto b = run_simulate(s, in(dir / "b"));
    CHECK(slurp(a) == slurp(b));

    Table t;
    t.add("x", {0.0, 0.5, 1.0});
    t.add("y", {1.25, -3.5e-7, 2.0});
    write_csv(dir / "t.csv", t, {{"note", "hello"}});
    const auto back = read_csv(dir / "t.csv");
    CHECK(back.columns == t.columns);
    CHECK(back.data == t.data);
}

TEST_CASE("JSON reader reports malformed input")
{
    const auto dir = scratch("json");
    {
        std::ofstream f(dir / "bad.json");
        f << "{ \"name\": ";
    }
    CHECK_THROWS_AS(read_json(dir / "bad.json"), ValidationError);
    CHECK_THROWS_AS(read_json(dir / "missing.json"), ValidationError);
}
