#pragma once

#include <map>
#include <string>
#include <vector>

#include "rheo/admissibility.hpp"
#include "rheo/flow.hpp"

namespace rheo {

/// Parse error carrying the offending line number.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& file, int line, const std::string& msg)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg), line_no(line) {}
    int line_no;
};

/// Line-oriented `key = value` file with '#' comments. Keys keep their
/// order of first appearance; duplicate keys are errors.
class KvFile {
public:
    static KvFile parse_file(const std::string& path);
    static KvFile parse_text(const std::string& text, const std::string& name);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::string& raw(const std::string& key) const;
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::string string_or(const std::string& key, const std::string& fallback) const;
    int line_of(const std::string& key) const;

    /// keys with the given prefix, prefix stripped
    std::map<std::string, std::string> section(const std::string& prefix) const;

    /// untouched keys outside the known set become errors
    void mark_used(const std::string& key) const;
    void ensure_all_used() const;

    const std::string& name() const { return name_; }

private:
    std::string name_;
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    mutable std::map<std::string, bool> used_;
};

// --- writers ---------------------------------------------------------------

void write_ledger_csv(const std::string& path, const std::vector<LedgerHistoryRow>& rows);

/// x, y, u, v, p, S_xx, S_xy, S_yy at cell centers
void write_snapshot_csv(const std::string& path, const FlowState& state, const Grid& grid);

/// legacy-VTK structured points, cell-center fields
void write_snapshot_vtk(const std::string& path, const FlowState& state, const Grid& grid);

/// y, u columns
void write_profile_csv(const std::string& path, const std::vector<double>& y,
                       const std::vector<double>& u);

std::string admissibility_report_json(const std::string& relation_name,
                                      const std::map<std::string, std::string>& relation_kv,
                                      const std::vector<AdmissibilityReport>& reports);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace rheo
