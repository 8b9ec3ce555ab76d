#include "rheo/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace rheo {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

KvFile KvFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

KvFile KvFile::parse_text(const std::string& text, const std::string& name) {
    KvFile kv;
    kv.name_ = name;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool any_content = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        any_content = true;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(name, lineno, "expected 'key = value', got '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError(name, lineno, "empty key");
        if (val.empty()) throw ConfigError(name, lineno, "empty value for key '" + key + "'");
        if (kv.values_.count(key))
            throw ConfigError(name, lineno, "duplicate key '" + key + "'");
        kv.values_[key] = val;
        kv.lines_[key] = lineno;
    }
    if (!any_content) throw ConfigError(name, lineno == 0 ? 1 : lineno, "empty config file");
    return kv;
}

const std::string& KvFile::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError(name_, 0, "missing required key '" + key + "'");
    used_[key] = true;
    return it->second;
}

double KvFile::number(const std::string& key) const {
    const std::string& v = raw(key);
    size_t pe = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pe);
    } catch (const std::exception&) {
        throw ConfigError(name_, line_of(key), "key '" + key + "': not a number: '" + v + "'");
    }
    if (pe != v.size())
        throw ConfigError(name_, line_of(key), "key '" + key + "': not a number: '" + v + "'");
    return x;
}

double KvFile::number_or(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return number(key);
}

std::string KvFile::string_or(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    return raw(key);
}

int KvFile::line_of(const std::string& key) const {
    auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
}

std::map<std::string, std::string> KvFile::section(const std::string& prefix) const {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : values_) {
        if (k.rfind(prefix, 0) == 0) {
            out[k.substr(prefix.size())] = v;
            used_[k] = true;
        }
    }
    return out;
}

void KvFile::mark_used(const std::string& key) const {
    if (values_.count(key)) used_[key] = true;
}

void KvFile::ensure_all_used() const {
    for (const auto& [k, v] : values_) {
        (void)v;
        auto it = used_.find(k);
        if (it == used_.end() || !it->second)
            throw ConfigError(name_, line_of(k), "unknown key '" + k + "'");
    }
}

// ---------------------------------------------------------------------------

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

void write_ledger_csv(const std::string& path, const std::vector<LedgerHistoryRow>& rows) {
    std::ostringstream out;
    out << "t,kinetic,bulk_diss,boundary_diss,work,defect\n";
    for (const auto& r : rows)
        out << fmt_full(r.t) << ',' << fmt_full(r.kinetic) << ',' << fmt_full(r.bulk_diss) << ','
            << fmt_full(r.boundary_diss) << ',' << fmt_full(r.work) << ',' << fmt_full(r.defect)
            << '\n';
    write_text_file(path, out.str());
}

void write_snapshot_csv(const std::string& path, const FlowState& state, const Grid& grid) {
    std::ostringstream out;
    out << "x,y,u,v,p,S_xx,S_xy,S_yy\n";
    const int nx = grid.nx, ny = grid.ny;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int ip = (i + 1) % nx;
            double uc = 0.5 * (state.u(i, j) + state.u(ip, j));
            double vc = 0.5 * (state.v(i, j) + state.v(i, j + 1));
            double sxy = 0.25 * (state.Sxy(i, j) + state.Sxy(ip, j) + state.Sxy(i, j + 1) +
                                 state.Sxy(ip, j + 1));
            out << fmt_full(grid.xc(i)) << ',' << fmt_full(grid.yc(j)) << ',' << fmt_full(uc)
                << ',' << fmt_full(vc) << ',' << fmt_full(state.p(i, j)) << ','
                << fmt_full(state.Sxx(i, j)) << ',' << fmt_full(sxy) << ','
                << fmt_full(state.Syy(i, j)) << '\n';
        }
    write_text_file(path, out.str());
}

void write_snapshot_vtk(const std::string& path, const FlowState& state, const Grid& grid) {
    std::ostringstream out;
    const int nx = grid.nx, ny = grid.ny;
    out << "# vtk DataFile Version 3.0\n";
    out << "channel flow snapshot t=" << fmt_full(state.t) << "\n";
    out << "ASCII\nDATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << nx << ' ' << ny << " 1\n";
    out << "ORIGIN " << fmt_full(grid.xc(0)) << ' ' << fmt_full(grid.yc(0)) << " 0\n";
    out << "SPACING " << fmt_full(grid.hx()) << ' ' << fmt_full(grid.hy()) << " 1\n";
    out << "POINT_DATA " << nx * ny << "\n";
    out << "VECTORS velocity double\n";
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int ip = (i + 1) % nx;
            double uc = 0.5 * (state.u(i, j) + state.u(ip, j));
            double vc = 0.5 * (state.v(i, j) + state.v(i, j + 1));
            out << fmt_full(uc) << ' ' << fmt_full(vc) << " 0\n";
        }
    auto scalar = [&](const char* fname, auto get) {
        out << "SCALARS " << fname << " double 1\nLOOKUP_TABLE default\n";
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) out << fmt_full(get(i, j)) << '\n';
    };
    scalar("pressure", [&](int i, int j) { return state.p(i, j); });
    scalar("S_xx", [&](int i, int j) { return state.Sxx(i, j); });
    scalar("S_yy", [&](int i, int j) { return state.Syy(i, j); });
    scalar("S_xy", [&](int i, int j) {
        int ip = (i + 1) % nx;
        return 0.25 * (state.Sxy(i, j) + state.Sxy(ip, j) + state.Sxy(i, j + 1) +
                       state.Sxy(ip, j + 1));
    });
    write_text_file(path, out.str());
}

void write_profile_csv(const std::string& path, const std::vector<double>& y,
                       const std::vector<double>& u) {
    std::ostringstream out;
    out << "y,u\n";
    for (size_t i = 0; i < y.size(); ++i)
        out << fmt_full(y[i]) << ',' << fmt_full(u[i]) << '\n';
    write_text_file(path, out.str());
}

std::string admissibility_report_json(const std::string& relation_name,
                                      const std::map<std::string, std::string>& relation_kv,
                                      const std::vector<AdmissibilityReport>& reports) {
    nlohmann::json j;
    j["relation"] = relation_name;
    j["config"] = relation_kv;
    bool all = true;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json e;
        e["condition"] = to_string(r.condition);
        e["passed"] = r.passed;
        e["constants"] = r.estimated_constants;
        e["witness"] = r.worst_witness;
        e["witness_layout"] = r.witness_layout;
        e["flags"] = r.flags;
        arr.push_back(e);
        all = all && r.passed;
    }
    j["conditions"] = arr;
    j["all_passed"] = all;
    return j.dump(2) + "\n";
}

}  // namespace rheo
