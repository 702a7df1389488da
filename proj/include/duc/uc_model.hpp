#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "duc/common.hpp"

namespace duc {

/// Technical and cost parameters of one generating unit.
struct GeneratorParams {
    double p_min = 0.0;          // MW
    double p_max = 0.0;          // MW
    double ramp_up = 0.0;        // MW/h
    double ramp_down = 0.0;      // MW/h
    double startup_ramp = 0.0;   // MW/h
    double shutdown_ramp = 0.0;  // MW/h
    int min_up = 1;              // hours
    int min_down = 1;            // hours
    double cost_fixed = 0.0;     // $ per committed hour
    double cost_linear = 0.0;    // $/MWh
    double cost_quad = 0.0;      // $/MW^2 h
    double cost_startup = 0.0;   // $
    double cost_shutdown = 0.0;  // $
};

/// Physical unit state just before the first scheduling period.
struct InitialConditions {
    std::vector<int> committed;     // y at t=0, one entry per unit
    std::vector<double> power;      // MW at t=0, one entry per unit
};

/// Scenario-indexed net load and reserve requirements. Column s of each
/// T-by-S matrix is one scenario; S=1 is the deterministic case.
struct ScenarioSet {
    int n_scenarios = 1;
    std::vector<double> probability;    // length S, sums to 1
    std::vector<double> net_load;       // T*S row-major (t major, s minor), MW
    std::vector<double> reserve_up;     // T*S row-major, MW
    std::vector<double> reserve_down;   // T*S row-major, MW
    double response_window = 1.0;       // hours

    double load(int t, int s) const { return net_load[static_cast<std::size_t>(t) * n_scenarios + s]; }
    double r_up(int t, int s) const { return reserve_up[static_cast<std::size_t>(t) * n_scenarios + s]; }
    double r_down(int t, int s) const { return reserve_down[static_cast<std::size_t>(t) * n_scenarios + s]; }
};

struct UcInstance {
    std::vector<GeneratorParams> generators;
    InitialConditions initial;
    ScenarioSet scenarios;
    int horizon = 0;

    int n_units() const { return static_cast<int>(generators.size()); }
    int n_scenarios() const { return scenarios.n_scenarios; }
};

/// Returns the list of invariant violations; empty means valid.
std::vector<std::string> validate_instance(const UcInstance& inst);

/// Throws ValidationError listing every violation.
void require_valid(const UcInstance& inst);

/// Loads and validates an instance file (schema documented in README).
UcInstance load_instance(const std::string& path);

/// Parses an instance from its textual form without touching the filesystem.
UcInstance parse_instance(const std::string& text);

/// Serializes an instance to its canonical textual form.
std::string serialize_instance(const UcInstance& inst);

void save_instance(const UcInstance& inst, const std::string& path);

/// Deterministically builds a feasible instance with peak net load between
/// 40% and 90% of total capacity.
UcInstance generate_synthetic(int n_units, int horizon, int n_scenarios, std::uint64_t seed);

/// Collapses scenarios to the probability-weighted mean net load (S=1).
UcInstance deterministic_view(const UcInstance& inst);

}  // namespace duc
