#include "rheo/scenario.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include "json.hpp"

namespace rheo {

OracleKind oracle_kind_from_string(const std::string& s) {
    if (s == "none") return OracleKind::none;
    if (s == "poiseuille") return OracleKind::poiseuille;
    if (s == "couette_stick_slip") return OracleKind::couette_stick_slip;
    if (s == "stokes_decay") return OracleKind::stokes_decay;
    throw std::invalid_argument("unknown oracle kind: " + s);
}

std::string to_string(OracleKind k) {
    switch (k) {
        case OracleKind::none: return "none";
        case OracleKind::poiseuille: return "poiseuille";
        case OracleKind::couette_stick_slip: return "couette_stick_slip";
        case OracleKind::stokes_decay: return "stokes_decay";
    }
    return "none";
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
    if (s == "eps") return SweepParameter::eps;
    if (s == "delta") return SweepParameter::delta;
    if (s == "h") return SweepParameter::h;
    if (s == "dt") return SweepParameter::dt;
    throw std::invalid_argument("unknown sweep parameter: " + s + " (use eps|delta|h|dt)");
}

std::string to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::eps: return "eps";
        case SweepParameter::delta: return "delta";
        case SweepParameter::h: return "h";
        case SweepParameter::dt: return "dt";
    }
    return "eps";
}

// ---------------------------------------------------------------------------

static Scenario assemble_scenario(const KvFile& kv) {
    Scenario sc;
    sc.name = kv.string_or("name", "scenario");
    kv.mark_used("name");

    SimConfig& c = sc.config;
    c.grid.nx = static_cast<int>(kv.number_or("nx", 64));
    c.grid.ny = static_cast<int>(kv.number_or("ny", 64));
    c.grid.lx = kv.number_or("lx", 2.0);
    c.grid.ly = kv.number_or("ly", 2.0);
    for (const char* k : {"nx", "ny", "lx", "ly"}) kv.mark_used(k);

    auto bulk_kv = kv.section("bulk.");
    if (bulk_kv.empty()) throw ConfigError(kv.name(), 0, "missing bulk.* relation keys");
    c.bulk = BulkRelation::from_kv(bulk_kv);
    auto bdry_kv = kv.section("boundary.");
    if (bdry_kv.empty()) throw ConfigError(kv.name(), 0, "missing boundary.* relation keys");
    c.boundary = BoundaryRelation::from_kv(bdry_kv);

    c.eps = kv.number_or("eps", 1e-3);
    c.delta = kv.number_or("delta", 0.0);
    c.dt = kv.number_or("dt", 1e-2);
    c.t_end = kv.number_or("t_end", 1.0);
    c.body_force_x = kv.number_or("body_force_x", 0.0);
    c.body_force_y = kv.number_or("body_force_y", 0.0);
    c.v0 = v0_kind_from_string(kv.string_or("v0", "zero"));
    c.v0_amplitude = kv.number_or("v0_amplitude", 1.0);
    c.v0_param = kv.number_or("v0_param", 0.0);
    c.picard_sweeps = static_cast<int>(kv.number_or("picard_sweeps", 2));
    c.wall_velocity_bottom = kv.number_or("wall_velocity_bottom", 0.0);
    c.wall_velocity_top = kv.number_or("wall_velocity_top", 0.0);
    c.steady_tol = kv.number_or("steady_tol", 0.0);
    c.dim = static_cast<int>(kv.number_or("dim", 2));
    for (const char* k :
         {"eps", "delta", "dt", "t_end", "body_force_x", "body_force_y", "v0", "v0_amplitude",
          "v0_param", "picard_sweeps", "wall_velocity_bottom", "wall_velocity_top", "steady_tol",
          "dim"})
        kv.mark_used(k);

    sc.oracle = oracle_kind_from_string(kv.string_or("oracle", "none"));
    kv.mark_used("oracle");
    sc.seed = static_cast<uint64_t>(kv.number_or("seed", 0));
    kv.mark_used("seed");
    sc.snapshot_stride = static_cast<int>(kv.number_or("snapshot_stride", 0));
    kv.mark_used("snapshot_stride");
    for (const auto& [k, v] : kv.section("tol.")) {
        size_t pe = 0;
        sc.tolerances[k] = std::stod(v, &pe);
        if (pe != v.size()) throw ConfigError(kv.name(), 0, "tol." + k + ": bad number");
    }
    kv.ensure_all_used();

    // stokes_decay fills in the slowest slip eigenmode when not explicit
    if (sc.oracle == OracleKind::stokes_decay && sc.config.v0 == V0Kind::cosine_mode &&
        sc.config.v0_param == 0.0) {
        if (sc.config.bulk.kind() != BulkKind::navier_stokes ||
            sc.config.boundary.kind() != BoundaryKind::navier_slip)
            throw ConfigError(kv.name(), 0,
                              "stokes_decay oracle needs navier_stokes bulk and navier_slip walls");
        sc.config.v0_param = decay_mode_wavenumber(sc.config.bulk.param("nu"),
                                                   sc.config.boundary.param("gamma"),
                                                   0.5 * sc.config.grid.ly);
    }
    sc.config.validate();
    return sc;
}

Scenario parse_scenario_text(const std::string& text, const std::string& name) {
    return assemble_scenario(KvFile::parse_text(text, name));
}

Scenario parse_scenario_file(const std::string& path) {
    return assemble_scenario(KvFile::parse_file(path));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> x_mean_profile(const FlowState& st, const Grid& g) {
    std::vector<double> prof(static_cast<size_t>(g.ny), 0.0);
    for (int j = 0; j < g.ny; ++j) {
        double m = 0.0;
        for (int i = 0; i < g.nx; ++i) m += st.u(i, j);
        prof[static_cast<size_t>(j)] = m / g.nx;
    }
    return prof;
}

// plug extent of the resolved stress field: rows whose mean |S| stays below
// the activation threshold
double measured_plug_half_width(const FlowState& st, const Grid& g, double tau) {
    int rows = 0;
    for (int j = 0; j < g.ny; ++j) {
        double m = 0.0;
        for (int i = 0; i < g.nx; ++i) {
            int ip = (i + 1) % g.nx;
            SymTensor2 S = SymTensor2::diag2(st.Sxx(i, j), st.Syy(i, j));
            S.comp(2) = 0.25 * (st.Sxy(i, j) + st.Sxy(ip, j) + st.Sxy(i, j + 1) +
                                st.Sxy(ip, j + 1));
            m += frobenius_norm(S);
        }
        if (m / g.nx < tau) ++rows;
    }
    return 0.5 * rows * g.hy();
}

}  // namespace

void oracle_profile(const Scenario& scenario, std::vector<double>& y, std::vector<double>& u) {
    const Grid& g = scenario.config.grid;
    const double H = 0.5 * g.ly;
    y.clear();
    u.clear();
    auto push = [&](double yy, double uu) {
        y.push_back(yy);
        u.push_back(uu);
    };
    switch (scenario.oracle) {
        case OracleKind::none:
            throw std::invalid_argument("scenario '" + scenario.name + "' declares no oracle");
        case OracleKind::poiseuille: {
            ChannelOracle oc(scenario.config.bulk, scenario.config.boundary, H,
                             scenario.config.body_force_x);
            for (int j = 0; j < g.ny; ++j) push(g.yc(j), oc.velocity(g.yc(j) - H));
            break;
        }
        case OracleKind::couette_stick_slip: {
            CouetteOracle oc(scenario.config.bulk, scenario.config.boundary, H,
                             scenario.config.wall_velocity_top);
            for (int j = 0; j < g.ny; ++j) push(g.yc(j), oc.velocity(g.yc(j) - H));
            break;
        }
        case OracleKind::stokes_decay: {
            // decayed eigenmode at t_end
            double nu = scenario.config.bulk.param("nu");
            double lam = scenario.config.v0_param;
            double decay = std::exp(-nu * lam * lam * scenario.config.t_end);
            for (int j = 0; j < g.ny; ++j)
                push(g.yc(j),
                     scenario.config.v0_amplitude * decay * std::cos(lam * (g.yc(j) - H)));
            break;
        }
    }
}

ScenarioMetrics run_scenario(const Scenario& scenario, const std::string& out_dir) {
    namespace fs = std::filesystem;
    const SimConfig& cfg = scenario.config;
    FlowSolver solver(cfg);
    const Grid& g = cfg.grid;

    if (!out_dir.empty()) fs::create_directories(out_dir);

    // weak residual accumulated online over consecutive states
    auto bank = default_test_field_bank();
    FlowState prev = solver.state();
    std::vector<double> weak_acc(bank.size(), 0.0);

    ScenarioMetrics m;
    m.name = scenario.name;
    int steps = 0;
    double min_sd = 0.0, min_sv = 0.0, max_div = 0.0, max_wn = 0.0;
    while (solver.state().t < cfg.t_end - 0.5 * cfg.dt) {
        prev = solver.state();
        solver.step();
        ++steps;
        const auto& d = solver.diagnostics();
        min_sd = std::min(min_sd, d.min_bulk_sd);
        min_sv = std::min(min_sv, d.min_boundary_sv);
        max_div = std::max(max_div, d.max_div_normalized);
        max_wn = std::max(max_wn, d.max_wall_normal_velocity);
        weak_residual_accumulate(prev, solver.state(), cfg, bank, weak_acc);
        if (!out_dir.empty() && scenario.snapshot_stride > 0 &&
            steps % scenario.snapshot_stride == 0) {
            write_snapshot_vtk(out_dir + "/" + scenario.name + "_" + std::to_string(steps) +
                                   ".vtk",
                               solver.state(), g);
        }
        if (cfg.steady_tol > 0.0 && solver.steady_residual() < cfg.steady_tol) {
            m.steady_reached = true;
            break;
        }
    }

    m.t_final = solver.state().t;
    m.steps = steps;
    m.steady_residual = solver.steady_residual();
    m.max_div_normalized = max_div;
    m.max_wall_normal_velocity = max_wn;
    m.min_bulk_sd = min_sd;
    m.min_boundary_sv = min_sv;
    m.ledger = solver.ledger();
    for (double a : weak_acc) m.weak_residual = std::max(m.weak_residual, std::fabs(a));
    m.pressure_ratio = pressure_diagnostic(solver.state(), cfg).ratio;
    m.profile = x_mean_profile(solver.state(), g);

    // oracle comparison
    if (scenario.oracle != OracleKind::none) {
        std::vector<double> oy, ou;
        oracle_profile(scenario, oy, ou);
        auto prof = x_mean_profile(solver.state(), g);
        double num = 0.0, den = 0.0;
        for (int j = 0; j < g.ny; ++j) {
            double d = prof[static_cast<size_t>(j)] - ou[static_cast<size_t>(j)];
            num += d * d;
            den += ou[static_cast<size_t>(j)] * ou[static_cast<size_t>(j)];
        }
        m.l2_profile_error = den > 1e-300 ? std::sqrt(num / den) : std::sqrt(num * g.hy());
    }
    if (cfg.bulk.kind() == BulkKind::bingham || cfg.bulk.kind() == BulkKind::herschel_bulkley) {
        double tau = cfg.bulk.param("tau_star");
        m.plug_half_width = measured_plug_half_width(solver.state(), g, tau);
        if (scenario.oracle == OracleKind::poiseuille) {
            ChannelOracle oc(cfg.bulk, cfg.boundary, 0.5 * g.ly, cfg.body_force_x);
            m.plug_half_width_expected = oc.plug_half_width();
        }
    }

    // declared tolerances
    m.tolerances_met = true;
    for (const auto& [key, tol] : scenario.tolerances) {
        if (key == "l2_profile") {
            if (!m.l2_profile_error || *m.l2_profile_error > tol) m.tolerances_met = false;
        } else if (key == "defect") {
            if (m.ledger.defect > tol) m.tolerances_met = false;
        } else if (key == "plug_cells") {
            if (!m.plug_half_width || !m.plug_half_width_expected ||
                std::fabs(*m.plug_half_width - *m.plug_half_width_expected) >
                    tol * scenario.config.grid.hy())
                m.tolerances_met = false;
        } else if (key == "max_div") {
            if (m.max_div_normalized > tol) m.tolerances_met = false;
        } else {
            throw std::invalid_argument("scenario '" + scenario.name + "': unknown tolerance tol." +
                                        key);
        }
    }

    if (!out_dir.empty()) {
        write_ledger_csv(out_dir + "/" + scenario.name + "_ledger.csv", solver.ledger_history());
        write_snapshot_csv(out_dir + "/" + scenario.name + "_final.csv", solver.state(), g);
        write_snapshot_vtk(out_dir + "/" + scenario.name + "_final.vtk", solver.state(), g);
        if (scenario.oracle != OracleKind::none) {
            std::vector<double> oy, ou;
            oracle_profile(scenario, oy, ou);
            write_profile_csv(out_dir + "/" + scenario.name + "_oracle.csv", oy, ou);
        }
        write_text_file(out_dir + "/" + scenario.name + "_metrics.json", m.to_json());
    }
    return m;
}

int run_scenario_cli(const Scenario& scenario, const std::string& out_dir) {
    ScenarioMetrics m = run_scenario(scenario, out_dir);
    return m.tolerances_met ? 0 : 1;
}

std::string ScenarioMetrics::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["t_final"] = t_final;
    j["steps"] = steps;
    j["steady_reached"] = steady_reached;
    j["steady_residual"] = steady_residual;
    j["max_div_normalized"] = max_div_normalized;
    j["max_wall_normal_velocity"] = max_wall_normal_velocity;
    j["min_bulk_sd"] = min_bulk_sd;
    j["min_boundary_sv"] = min_boundary_sv;
    j["weak_residual"] = weak_residual;
    j["pressure_ratio"] = pressure_ratio;
    j["ledger"] = {{"t", ledger.t},
                   {"kinetic", ledger.kinetic},
                   {"kinetic0", ledger.kinetic0},
                   {"bulk_dissipation", ledger.bulk_dissipation},
                   {"boundary_dissipation", ledger.boundary_dissipation},
                   {"work", ledger.work},
                   {"defect", ledger.defect}};
    if (l2_profile_error) j["l2_profile_error"] = *l2_profile_error;
    if (plug_half_width) j["plug_half_width"] = *plug_half_width;
    if (plug_half_width_expected) j["plug_half_width_expected"] = *plug_half_width_expected;
    j["tolerances_met"] = tolerances_met;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

SweepResult sweep(const Scenario& scenario, SweepParameter param,
                  const std::vector<double>& values, const std::string& out_dir) {
    if (values.size() < 2) throw std::invalid_argument("sweep: need at least two values");
    bool inc = values[1] > values[0];
    for (size_t i = 1; i < values.size(); ++i) {
        bool step_inc = values[i] > values[i - 1];
        if (values[i] == values[i - 1] || step_inc != inc)
            throw std::invalid_argument("sweep: values must be strictly monotone");
    }

    SweepResult out;
    out.parameter = param;
    out.values = values;

    std::vector<std::vector<double>> profiles;
    std::vector<Grid> grids;
    for (double v : values) {
        Scenario sc = scenario;
        sc.name = scenario.name + "_" + to_string(param) + "_" + std::to_string(v);
        switch (param) {
            case SweepParameter::eps: sc.config.eps = v; break;
            case SweepParameter::delta: sc.config.delta = v; break;
            case SweepParameter::dt: sc.config.dt = v; break;
            case SweepParameter::h: {
                sc.config.grid.nx = static_cast<int>(std::lround(sc.config.grid.lx / v));
                sc.config.grid.ny = static_cast<int>(std::lround(sc.config.grid.ly / v));
                break;
            }
        }
        auto t0 = std::chrono::steady_clock::now();
        ScenarioMetrics m = run_scenario(sc, out_dir);
        auto t1 = std::chrono::steady_clock::now();
        out.runtimes_s.push_back(std::chrono::duration<double>(t1 - t0).count());
        profiles.push_back(m.profile);
        grids.push_back(sc.config.grid);
        out.metrics.push_back(std::move(m));
    }

    // successive-difference norms of the x-averaged velocity profile,
    // restricting the finer grid to the coarser centers when they differ
    for (size_t i = 0; i + 1 < values.size(); ++i) {
        const auto& pa = profiles[i];
        const auto& pb = profiles[i + 1];
        const Grid& ga = grids[i];
        const Grid& gb = grids[i + 1];
        const Grid& gc = ga.ny <= gb.ny ? ga : gb;  // coarser
        const auto& pc = ga.ny <= gb.ny ? pa : pb;
        const Grid& gf = ga.ny <= gb.ny ? gb : ga;
        const auto& pf = ga.ny <= gb.ny ? pb : pa;
        double acc = 0.0;
        for (int j = 0; j < gc.ny; ++j) {
            double y = gc.yc(j);
            // linear interpolation of the finer profile at y
            double s = y / gf.hy() - 0.5;
            int j0 = static_cast<int>(std::floor(s));
            double w = s - j0;
            int ja = std::clamp(j0, 0, gf.ny - 1);
            int jb = std::clamp(j0 + 1, 0, gf.ny - 1);
            double fine = (1.0 - w) * pf[static_cast<size_t>(ja)] + w * pf[static_cast<size_t>(jb)];
            double d = pc[static_cast<size_t>(j)] - fine;
            acc += d * d * gc.hy();
        }
        out.successive_diffs.push_back(std::sqrt(acc));
    }

    // observed order from oracle errors on halving sequences
    std::vector<double> errs;
    for (const auto& m : out.metrics)
        errs.push_back(m.l2_profile_error ? *m.l2_profile_error : m.weak_residual);
    for (size_t i = 0; i + 1 < errs.size(); ++i) {
        double ratio = values[i] / values[i + 1];
        if (errs[i + 1] > 0.0 && std::fabs(ratio - 2.0) < 1e-9)
            out.observed_orders.push_back(std::log2(errs[i] / errs[i + 1]));
    }
    if (!out_dir.empty())
        write_text_file(out_dir + "/" + scenario.name + "_sweep_" + to_string(param) + ".json",
                        out.to_json());
    return out;
}

std::string SweepResult::to_json() const {
    nlohmann::json j;
    j["parameter"] = to_string(parameter);
    j["values"] = values;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : metrics) arr.push_back(nlohmann::json::parse(m.to_json()));
    j["metrics"] = arr;
    j["successive_diffs"] = successive_diffs;
    j["observed_orders"] = observed_orders;
    j["runtimes_s"] = runtimes_s;
    return j.dump(2) + "\n";
}

}  // namespace rheo
