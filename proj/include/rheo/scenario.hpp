#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rheo/flow.hpp"
#include "rheo/io.hpp"
#include "rheo/oracle.hpp"

namespace rheo {

enum class OracleKind { none, poiseuille, couette_stick_slip, stokes_decay };
OracleKind oracle_kind_from_string(const std::string& s);
std::string to_string(OracleKind k);

struct Scenario {
    std::string name;
    SimConfig config;
    OracleKind oracle = OracleKind::none;
    std::map<std::string, double> tolerances;  // "l2_profile", "defect", "plug_cells"
    uint64_t seed = 0;
    int snapshot_stride = 0;  // 0: final snapshot only
};

/// Parses a scenario key-value file; throws ConfigError with line numbers.
Scenario parse_scenario_file(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& name);

struct ScenarioMetrics {
    std::string name;
    double t_final = 0.0;
    int steps = 0;
    bool steady_reached = false;
    double steady_residual = 0.0;
    double max_div_normalized = 0.0;
    double max_wall_normal_velocity = 0.0;
    double min_bulk_sd = 0.0;
    double min_boundary_sv = 0.0;
    double weak_residual = 0.0;
    double pressure_ratio = 0.0;
    EnergyLedger ledger;
    std::optional<double> l2_profile_error;   // relative, against the oracle
    std::optional<double> plug_half_width;    // measured
    std::optional<double> plug_half_width_expected;
    std::vector<double> profile;              // x-averaged u(y), not serialized
    bool tolerances_met = true;

    std::string to_json() const;  // deterministic: no timing data
};

/// Runs the scenario; writes ledger CSV, snapshots (CSV + VTK), profile and
/// metrics JSON under out_dir when non-empty. Returns the metrics.
ScenarioMetrics run_scenario(const Scenario& scenario, const std::string& out_dir);

/// Exit-code wrapper: 0 tolerances met, 1 failed.
int run_scenario_cli(const Scenario& scenario, const std::string& out_dir);

/// Oracle profile sampled at the scenario grid's center heights.
void oracle_profile(const Scenario& scenario, std::vector<double>& y, std::vector<double>& u);

enum class SweepParameter { eps, delta, h, dt };
SweepParameter sweep_parameter_from_string(const std::string& s);
std::string to_string(SweepParameter p);

struct SweepResult {
    SweepParameter parameter = SweepParameter::eps;
    std::vector<double> values;
    std::vector<ScenarioMetrics> metrics;
    std::vector<double> successive_diffs;   // ||profile(v_k) - profile(v_{k+1})||_2
    std::vector<double> observed_orders;    // log2(e_k / e_{k+1}) where defined
    std::vector<double> runtimes_s;

    std::string to_json() const;
};

SweepResult sweep(const Scenario& scenario, SweepParameter param,
                  const std::vector<double>& values, const std::string& out_dir);

}  // namespace rheo
