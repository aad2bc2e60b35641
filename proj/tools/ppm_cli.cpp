#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "ppm/runner.hpp"
#include "ppm/types.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 2, kSolver = 3, kAcceptance = 4 };

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Purified pseudomode simulations with nonlinear system-bath coupling"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = ".";
    int threads = 1;
    std::string backend;
    bool convergence = false;
    std::string which = "all";

    auto common = [&](CLI::App* sub, bool needs_scenario) {
        auto* opt = sub->add_option("--scenario", scenario_path, "scenario JSON file");
        if (needs_scenario)
            opt->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
        sub->add_option("--backend", backend, "override numerics.backend")
            ->check(CLI::IsMember({"ppm", "finite_a", "heom", "exact_cavity"}));
        sub->add_flag("--convergence", convergence, "repeat with the excitation cap doubled and report the change");
    };
    auto* fit = app.add_subcommand("fit", "fit the bath power spectrum and write the decomposition");
    auto* simulate = app.add_subcommand("simulate", "time evolution of the reduced system state");
    auto* steady = app.add_subcommand("steady", "steady-state observables, optionally over an (alpha2, alpha3) grid");
    auto* spectrum = app.add_subcommand("spectrum", "emission spectrum from the two-time correlation");
    auto* benchmark = app.add_subcommand("benchmark", "built-in reference scenarios with pass/fail checks");
    for (auto* sub : {fit, simulate, steady, spectrum})
        common(sub, true);
    common(benchmark, false);
    benchmark->add_option("which", which, "fig1 | fig2 | fig3 | all")
        ->check(CLI::IsMember({"fig1", "fig2", "fig3", "all"}));

    CLI11_PARSE(app, argc, argv);

    ppm::RunContext ctx;
    ctx.out_dir = out_dir;
    ctx.threads = threads;
    ctx.convergence = convergence;
    if (!backend.empty())
        ctx.backend = backend;

    try {
        std::filesystem::create_directories(ctx.out_dir);
        if (benchmark->parsed())
            return ppm::run_benchmark(which, ctx) ? kOk : kAcceptance;
        const auto s = ppm::load_scenario(scenario_path);
        if (fit->parsed())
            ppm::run_fit(s, ctx);
        else if (simulate->parsed())
            ppm::run_simulate(s, ctx);
        else if (steady->parsed())
            ppm::run_steady(s, ctx);
        else if (spectrum->parsed())
            ppm::run_spectrum(s, ctx);
        return kOk;
    } catch (const ppm::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const ppm::Error& e) {
        std::cerr << "solver error (" << scenario_path << "): " << e.what() << '\n';
        return kSolver;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidation;
    }
}
