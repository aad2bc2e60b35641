#pragma once

#include <limits>

// hbar = 1 throughout. Lab-unit inputs (meV, K, ps) are converted here.
namespace ppm::units {

inline constexpr double hbar_mev_ps = 0.6582119569; // meV * ps
inline constexpr double k_b_mev_per_k = 0.08617333; // meV / K

inline constexpr double mev_to_rad_per_ps(double e_mev) { return e_mev / hbar_mev_ps; }
inline constexpr double rad_per_ps_to_mev(double w) { return w * hbar_mev_ps; }
inline constexpr double kelvin_to_mev(double t_k) { return t_k * k_b_mev_per_k; }

/// Inverse temperature in ps for a temperature in kelvin; T = 0 maps to +inf.
inline constexpr double beta_ps_from_kelvin(double t_k)
{
    if (t_k <= 0.0)
        return std::numeric_limits<double>::infinity();
    return hbar_mev_ps / kelvin_to_mev(t_k);
}

} // namespace ppm::units
