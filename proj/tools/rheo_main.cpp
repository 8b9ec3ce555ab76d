#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rheo/admissibility.hpp"
#include "rheo/io.hpp"
#include "rheo/scenario.hpp"

namespace {

// 0 success, 1 tolerance/check failure, 2 usage/parse error
constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos < csv.size()) {
        size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        out.push_back(std::stod(csv.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

int cmd_run(const std::string& path, const std::string& out_dir, uint64_t /*seed*/) {
    rheo::Scenario sc = rheo::parse_scenario_file(path);
    rheo::ScenarioMetrics m = rheo::run_scenario(sc, out_dir);
    std::cout << m.to_json();
    return m.tolerances_met ? kExitOk : kExitCheckFailed;
}

int cmd_sweep(const std::string& path, const std::string& param, const std::string& values,
              const std::string& out_dir) {
    rheo::Scenario sc = rheo::parse_scenario_file(path);
    auto p = rheo::sweep_parameter_from_string(param);
    auto vals = parse_values(values);
    rheo::SweepResult r = rheo::sweep(sc, p, vals, out_dir);
    std::cout << r.to_json();
    return kExitOk;
}

int cmd_admit(const std::string& path, uint64_t seed, int samples, int threads,
              const std::string& report_path) {
    rheo::KvFile kv = rheo::KvFile::parse_file(path);
    auto values = kv.section("");  // all keys
    kv.ensure_all_used();
    auto it = values.find("kind");
    if (it == values.end()) {
        std::cerr << path << ": missing 'kind'\n";
        return kExitUsage;
    }

    rheo::Sampler sampler;
    sampler.seed = seed;
    sampler.count = samples;
    sampler.threads = threads;

    std::vector<rheo::AdmissibilityReport> reports;
    bool is_bulk = true;
    try {
        rheo::bulk_kind_from_string(it->second);
    } catch (const std::exception&) {
        is_bulk = false;
    }
    if (is_bulk) {
        rheo::BulkRelation rel = rheo::BulkRelation::from_kv(values);
        reports = rheo::check_bulk(rel, sampler);
    } else {
        rheo::BoundaryRelation rel = rheo::BoundaryRelation::from_kv(values);
        reports = rheo::check_boundary(rel, sampler);
    }
    std::string json = rheo::admissibility_report_json(it->second, values, reports);
    if (!report_path.empty())
        rheo::write_text_file(report_path, json);
    else
        std::cout << json;
    bool all = true;
    for (const auto& r : reports) {
        std::printf("%-7s %s\n", rheo::to_string(r.condition).c_str(),
                    r.passed ? "passed" : "FAILED");
        all = all && r.passed;
    }
    return all ? kExitOk : kExitCheckFailed;
}

int cmd_oracle(const std::string& path, const std::string& out) {
    rheo::Scenario sc = rheo::parse_scenario_file(path);
    std::vector<double> y, u;
    rheo::oracle_profile(sc, y, u);
    if (!out.empty()) {
        rheo::write_profile_csv(out, y, u);
    } else {
        std::printf("y,u\n");
        for (size_t i = 0; i < y.size(); ++i) std::printf("%.17g,%.17g\n", y[i], u[i]);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rheo: implicitly constituted fluid rheology toolkit"};
    app.require_subcommand(1);

    std::string scenario_path, relation_path, out_dir, param, values, report_path, profile_out;
    uint64_t seed = 0;
    int samples = 256, threads = 1;

    auto* run = app.add_subcommand("run", "run a scenario file");
    run->add_option("scenario", scenario_path, "scenario config file")->required();
    run->add_option("--out-dir", out_dir, "output directory");
    run->add_option("--seed", seed, "rng seed");
    run->add_option("--threads", threads, "worker threads");

    auto* sw = app.add_subcommand("sweep", "parameter sweep over a scenario");
    sw->add_option("scenario", scenario_path, "scenario config file")->required();
    sw->add_option("--param", param, "eps|delta|h|dt")->required();
    sw->add_option("--values", values, "comma-separated values")->required();
    sw->add_option("--out-dir", out_dir, "output directory");
    sw->add_option("--seed", seed, "rng seed");
    sw->add_option("--threads", threads, "worker threads");

    auto* ad = app.add_subcommand("admit", "admissibility checks for a relation config");
    ad->add_option("relation", relation_path, "relation config file")->required();
    ad->add_option("--seed", seed, "rng seed");
    ad->add_option("--samples", samples, "sample count per check");
    ad->add_option("--threads", threads, "worker threads");
    ad->add_option("--report", report_path, "write the JSON report here");

    auto* orc = app.add_subcommand("oracle", "print or write a scenario's oracle profile");
    orc->add_option("scenario", scenario_path, "scenario config file")->required();
    orc->add_option("--out", profile_out, "profile CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(scenario_path, out_dir, seed);
        if (sw->parsed()) return cmd_sweep(scenario_path, param, values, out_dir);
        if (ad->parsed()) return cmd_admit(relation_path, seed, samples, threads, report_path);
        if (orc->parsed()) return cmd_oracle(scenario_path, profile_out);
    } catch (const rheo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitUsage;
}
