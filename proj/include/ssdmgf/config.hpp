#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace ssdmgf {

/// Engine parameters. Defaults are the shipped operating point; a JSON config
/// file and then CLI flags override individual entries (flags win).
struct GridConfig {
    // objective weights
    double alpha_cl = 10.0; ///< weight on restored critical load
    double alpha_nl = 1.0;  ///< weight on restored non-critical load

    // cold-load pickup staircase: extra demand fraction in the first steps
    // after (re-)energization; multiplier is 1 + beta[age], then 1.
    std::array<double, 3> beta{1.0, 0.6, 0.3};

    // frequency windows, Hz
    double epsilon_sync = 0.05; ///< max |f - f'| for a synchronized pair
    double f_floor = 59.5;
    double f_ceil = 60.5;
    double rocof_gain = 1.0;   ///< Hz/s per unit step of island loading fraction
    double rocof_max = 3.0;    ///< Hz/s
    double nadir_gain = 1.0;   ///< Hz dip per unit step of island loading fraction
    double nadir_floor = 58.5; ///< Hz

    // voltage band, magnitudes in p.u. (the solver works on squared voltage)
    double v_floor = 0.95;
    double v_ceil = 1.05;

    // numeric tolerances
    double lin_tol = 1e-9;  ///< equality families that are linear identities
    double quad_tol = 1e-6; ///< quadratic capability checks

    // photovoltaic coupling: steps between block energization and PV output
    int pv_delay_steps = 1;

    // time discretization
    double dt_minutes = 15.0;
    int horizon_steps = 32;

    // label-resolution threshold on normalized root scores
    double lambda = 0.5;

    // search budget
    std::uint64_t budget_nodes = 100000;
    double budget_seconds = 60.0;

    double dt_hours() const { return dt_minutes / 60.0; }
    double v_floor_sq() const { return v_floor * v_floor; }
    double v_ceil_sq() const { return v_ceil * v_ceil; }
};

/// Parse a JSON config file over the defaults; unknown keys are an error so
/// typos fail loudly. Passing an empty path returns the defaults.
GridConfig load_config(const std::string& path);
GridConfig parse_config(const std::string& json_text, const std::string& origin);

/// Serialize the effective configuration (for manifests and --print-config).
std::string config_to_json(const GridConfig& c);

} // namespace ssdmgf
