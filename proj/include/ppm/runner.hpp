#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "ppm/scenario.hpp"

namespace ppm {

struct RunContext {
    std::filesystem::path out_dir = ".";
    int threads = 1;
    std::optional<std::string> backend;
    bool convergence = false;
    std::ostream* log = nullptr;
};

/// Returns the path of the main file written.
std::filesystem::path run_fit(const Scenario& s, const RunContext& ctx);
std::filesystem::path run_simulate(const Scenario& s, const RunContext& ctx);
std::filesystem::path run_steady(const Scenario& s, const RunContext& ctx);
std::filesystem::path run_spectrum(const Scenario& s, const RunContext& ctx);

/// which: fig1 | fig2 | fig3 | all. Prints one PASS/FAIL line per check; returns true when all pass.
bool run_benchmark(const std::string& which, const RunContext& ctx);

} // namespace ppm
