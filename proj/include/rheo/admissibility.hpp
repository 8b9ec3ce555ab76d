#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rheo/relations.hpp"

namespace rheo {

enum class SampleDistribution { gaussian_shell, grid };

/// Sampling plan shared by all admissibility checks. The same enum of
/// conditions covers the boundary (g1)-(g4) checks.
struct Sampler {
    uint64_t seed = 0;
    int count = 256;
    std::vector<double> radius_schedule = {0.1, 1.0, 10.0};
    SampleDistribution distribution = SampleDistribution::gaussian_shell;
    int dim = 2;
    int probe_count = 256;   // Rayleigh probes per point for the sign tests
    int threads = 1;

    void validate() const;
};

enum class Condition { G1, G2, G2star, G3, G4 };
std::string to_string(Condition c);

struct AdmissibilityReport {
    Condition condition = Condition::G1;
    bool passed = false;
    std::map<std::string, double> estimated_constants;
    std::vector<double> worst_witness;  // flattened components, see layout
    std::string witness_layout;
    std::vector<std::string> flags;     // e.g. "inconclusive", "slope_growth"
};

/// Absolute tolerance for all sign tests (one order above FD truncation).
constexpr double kSignTol = 1e-7;

// --- bulk checks -----------------------------------------------------------

AdmissibilityReport check_lipschitz(const BulkRelation& rel, const Sampler& sampler);
AdmissibilityReport check_derivative_signs(const BulkRelation& rel, const Sampler& sampler,
                                           double fd_step = 1e-5);
AdmissibilityReport check_graph_monotone(const BulkRelation& rel, const Sampler& sampler);
AdmissibilityReport check_asymptotics(const BulkRelation& rel, int ray_count,
                                      const std::vector<double>& radius_schedule);
AdmissibilityReport check_coercivity(const BulkRelation& rel, const Sampler& sampler);

/// All five checks in order {G1, G2, G2*, G3, G4}.
std::vector<AdmissibilityReport> check_bulk(const BulkRelation& rel, const Sampler& sampler);

// --- boundary checks -------------------------------------------------------

AdmissibilityReport check_lipschitz(const BoundaryRelation& rel, const Sampler& sampler);
AdmissibilityReport check_derivative_signs(const BoundaryRelation& rel, const Sampler& sampler,
                                           double fd_step = 1e-5);
AdmissibilityReport check_graph_monotone(const BoundaryRelation& rel, const Sampler& sampler);
AdmissibilityReport check_asymptotics(const BoundaryRelation& rel, int ray_count,
                                      const std::vector<double>& radius_schedule);
AdmissibilityReport check_coercivity(const BoundaryRelation& rel, const Sampler& sampler);

std::vector<AdmissibilityReport> check_boundary(const BoundaryRelation& rel,
                                                const Sampler& sampler);

/// Graph-point generation used by the G2*/G4 checks and by tests: explicit
/// branch when the catalog provides one, otherwise the collinear scalar maps.
void sample_graph_point(const BulkRelation& rel, class Rng& rng, double radius, SymTensor2& S,
                        SymTensor2& D, int dim);
void sample_graph_point(const BoundaryRelation& rel, class Rng& rng, double radius, Vec& s,
                        Vec& v, int dim);

}  // namespace rheo
