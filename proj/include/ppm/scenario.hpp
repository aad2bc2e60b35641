#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppm/bath.hpp"
#include "ppm/fitting.hpp"
#include "ppm/generators.hpp"
#include "ppm/model.hpp"
#include "ppm/ode.hpp"

namespace ppm {

struct Numerics {
    std::string backend = "ppm"; // ppm | finite_a | heom | exact_cavity
    int cap = 6;
    int cutoff = 0;
    int total_cap = -1;
    int cavity_cap = 40;
    double rtol = 1e-8;
    double atol = 1e-10;
    std::vector<double> a_values;
    double convergence_tol = 1e-4;
    FitOptions fit;
};

struct Grid {
    double min = 0.0;
    double max = 0.0;
    int points = 0;
    std::vector<double> values() const;
};

struct Outputs {
    std::vector<std::string> observables;
    std::vector<std::pair<std::string, Matrix>> custom_observables;
    Grid times{0.0, 10.0, 101};
    Grid frequencies{-3.0, 3.0, 601};
    double tau_max = 0.0; // <= 0: automatic window
    int tau_points = 2048;
    std::string apply = "sigma_minus";
    std::string measure = "sigma_plus";
    std::vector<double> sweep_alpha2;
    std::vector<double> sweep_alpha3;
    std::string prefix;
    bool svg = false;
};

/// A parsed scenario; every quantity is converted to internal units (rad/ps and ps for lab units).
struct Scenario {
    nlohmann::json resolved; // input with every default filled in, echoed into output headers
    std::string name;
    bool lab_units = false;
    /// Internal energy per user energy unit (1 for model units).
    double energy_scale = 1.0;
    SystemSpec system;
    std::optional<BathSpec> bath;
    std::optional<ExponentialDecomposition> decomposition;
    /// Empty when every alpha_n is zero: the system then evolves without a bath.
    std::optional<CouplingPolynomial> coupling;
    Numerics numerics;
    Outputs outputs;
};

Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

/// Operator from {"pauli": {...}}, {"named": "..."}, or {"matrix": [[...]]} (entries x or [re, im]).
Matrix parse_operator(const nlohmann::json& j, int dim, const std::string& field);

/// Decomposition from the file, the exact single-mode form, or an AAA fit of the bath.
ExponentialDecomposition scenario_decomposition(const Scenario& s);

/// Builds the requested backend. cap < 0 uses numerics.cap; a is only used by finite_a.
std::unique_ptr<LinearGenerator> make_generator(const Scenario& s, const std::string& backend, int cap = -1,
                                                double a = 0.0);

} // namespace ppm
