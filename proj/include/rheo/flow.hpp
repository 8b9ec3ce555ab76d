#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rheo/grid.hpp"
#include "rheo/regularization.hpp"
#include "rheo/relations.hpp"

namespace rheo {

/// Piecewise-linear convection/boundary cutoff: phi(delta * sq_speed) with
/// phi = 1 on [0,1), 2-s on [1,2), 0 on [2,inf).
double cutoff(double sq_speed, double delta);

enum class V0Kind { zero, uniform_x, shear_linear, cosine_mode, gradient_test };
V0Kind v0_kind_from_string(const std::string& s);
std::string to_string(V0Kind k);

struct SimConfig {
    Grid grid;
    BulkRelation bulk{BulkKind::navier_stokes, {{"nu", 1.0}}};
    BoundaryRelation boundary{BoundaryKind::navier_slip, {{"gamma", 1.0}}};
    double eps = 1e-3;
    double delta = 0.0;          // 0 = limit configuration (cutoff removed)
    double dt = 1e-2;
    double t_end = 1.0;
    double body_force_x = 0.0;
    double body_force_y = 0.0;
    V0Kind v0 = V0Kind::zero;
    double v0_amplitude = 1.0;
    double v0_param = 0.0;       // wavenumber for cosine_mode
    int picard_sweeps = 2;
    double wall_velocity_bottom = 0.0;
    double wall_velocity_top = 0.0;
    double steady_tol = 0.0;     // >0: stop when max|dv|/dt falls below
    int dim = 2;

    double growth_r() const { return bulk.growth_exponent(); }
    double growth_q() const { return boundary.growth_exponent(); }
    /// Theorem exponent z = max{r, q, (d+2)r/((d+2)r - 2d)}.
    double exponent_z() const;
    void validate() const;
};

struct FlowState {
    double t = 0.0;
    Field2D u;          // nx * ny
    Field2D v;          // nx * (ny+1), wall rows exactly 0
    Field2D p;          // nx * ny
    Field2D Sxx, Syy;   // centers
    Field2D Sxy;        // nodes nx * (ny+1); wall rows carry the traction value
    std::vector<double> s_bot, s_top;    // tangential traction (x-component)
    std::vector<double> uw_bot, uw_top;  // fluid tangential velocity at the wall
};

/// Cumulative energy budget; defect <= 0 + O(dt+h) is the discrete form of
/// the energy inequality.
struct EnergyLedger {
    double t = 0.0;
    double kinetic = 0.0;            // (1/2)|v(t)|^2
    double kinetic0 = 0.0;           // (1/2)|v(0)|^2
    double bulk_dissipation = 0.0;   // int S:Dv
    double boundary_dissipation = 0.0;
    double work = 0.0;               // body force + moving-wall power
    double defect = 0.0;             // kinetic - kinetic0 + dissipations - work
};

struct StepDiagnostics {
    double max_div_normalized = 0.0;      // max|div| / (|v|_inf / h)
    double min_bulk_sd = 0.0;             // min S:D / (1 + |S||D|) over points
    double min_boundary_sv = 0.0;         // min s.v_rel / (1 + |s||v|) over faces
    double max_wall_normal_velocity = 0.0;
    int picard_iterations = 0;
    int cg_iterations = 0;
};

struct LedgerHistoryRow {
    double t, kinetic, bulk_diss, boundary_diss, work, defect;
};

class FlowSolver {
public:
    explicit FlowSolver(SimConfig config);
    ~FlowSolver();
    FlowSolver(const FlowSolver&) = delete;
    FlowSolver& operator=(const FlowSolver&) = delete;

    const SimConfig& config() const;
    const FlowState& state() const;
    const EnergyLedger& ledger() const;
    const StepDiagnostics& diagnostics() const;

    /// One dt: cutoff convection, Picard-lagged implicit stress, wall
    /// traction balance, pressure projection, ledger accumulation.
    void step();

    /// Runs to t_end (or until steady_tol is met). Returns steps taken.
    int run();

    /// max |v^{n+1} - v^n| / dt of the last step
    double steady_residual() const;

    std::vector<LedgerHistoryRow> ledger_history() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Recomputes the energy ledger from a state history (>= 2 states).
EnergyLedger energy_ledger(const std::vector<FlowState>& history, const SimConfig& config);

/// Divergence-free test fields with zero wall-normal component, generated
/// from streamfunctions sin(2 pi k1 x / lx + phase) * sin(pi k2 y / ly).
struct TestField {
    int k1 = 0, k2 = 1;
    double phase = 0.0;
    double u(double x, double y, const Grid& g) const;
    double v(double x, double y, const Grid& g) const;
    double dudx(double x, double y, const Grid& g) const;
    double dudy(double x, double y, const Grid& g) const;
    double dvdx(double x, double y, const Grid& g) const;
    double dvdy(double x, double y, const Grid& g) const;
};

std::vector<TestField> default_test_field_bank();

/// Adds one step's signed contribution of the weak-form residual of the
/// limit momentum balance to the per-field accumulators.
void weak_residual_accumulate(const FlowState& prev, const FlowState& next,
                              const SimConfig& config, const std::vector<TestField>& bank,
                              std::vector<double>& acc);

/// Time-integrated weak-form residual of the limit momentum balance,
/// maximised over the test bank. Consistency diagnostic under refinement.
double weak_residual(const std::vector<FlowState>& history, const SimConfig& config,
                     const std::vector<TestField>& bank);

struct PressureDiagnostic {
    double p_norm = 0.0;      // discrete L^{z'} norm of p
    double surrogate = 0.0;   // |v x v|_{z'} + |S|_{z'} + |s|_{z',walls} + |b|_{z'}
    double ratio = 0.0;
};

PressureDiagnostic pressure_diagnostic(const FlowState& state, const SimConfig& config);

}  // namespace rheo
