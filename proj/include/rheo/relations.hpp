#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rheo/tensor.hpp"

namespace rheo {

// ---------------------------------------------------------------------------
// Bulk constitutive relations G(S, D) = 0
// ---------------------------------------------------------------------------

enum class BulkKind {
    navier_stokes,
    power_law,
    carreau,
    carreau_yasuda,
    cross,
    eyring,
    sisko,
    ellis,
    seely,
    glen,
    blatter,
    bingham,
    herschel_bulkley,
    activated_euler,
    shifted_power,   // (1+|D|)^{r-2} D family; non-monotone for r < 1 (checker fixture)
    custom,
};

std::string to_string(BulkKind k);
BulkKind bulk_kind_from_string(const std::string& s);

/// Which variable the canonical residual is explicit in. Every catalog
/// member is written with dG/dS >= 0; stress_explicit means G = S - S*(D),
/// rate_explicit means G = D*(S) - D (or a cleared-denominator variant).
enum class Orientation { stress_explicit, rate_explicit };

struct CustomBulk {
    std::function<SymTensor2(const SymTensor2&, const SymTensor2&)> residual;
    std::function<double(double, double)> scalar_residual;  // optional, may be null
    Orientation orientation = Orientation::stress_explicit;
    double growth_exponent = 2.0;
};

/// An implicit bulk relation from the catalog, immutable after construction.
class BulkRelation {
public:
    BulkRelation(BulkKind kind, std::map<std::string, double> params);
    static BulkRelation custom(CustomBulk impl);

    BulkKind kind() const { return kind_; }
    const std::map<std::string, double>& params() const { return params_; }
    double param(const std::string& name) const;
    double growth_exponent() const { return growth_; }
    double dual_exponent() const { return growth_ / (growth_ - 1.0); }
    Orientation orientation() const { return orientation_; }
    bool isotropic() const { return kind_ != BulkKind::custom || bool(custom_.scalar_residual); }

    /// Residual tensor G(S, D) of the canonical form.
    SymTensor2 eval(const SymTensor2& S, const SymTensor2& D) const;

    /// Collinear reduction: for S = s*U, D = d*U (U unit), G = gamma(s,d)*U.
    double scalar_residual(double s, double d) const;

    /// Closed-form S*(D) where the catalog admits one.
    std::optional<SymTensor2> explicit_stress(const SymTensor2& D) const;
    /// Closed-form D*(S) where the catalog admits one.
    std::optional<SymTensor2> explicit_rate(const SymTensor2& S) const;

    bool has_explicit_stress() const;
    bool has_explicit_rate() const;

    /// Scalar graph maps |S| <-> |D| (signed magnitudes). Closed form where
    /// available, otherwise monotone bisection on scalar_residual. Used by
    /// graph sampling and by the quadrature oracles.
    double scalar_stress_from_rate(double d) const;
    double scalar_rate_from_stress(double s) const;

    /// Distance of (S,D) to the nearest activation kink manifold
    /// (+inf for smooth members); admissibility excludes FD stencils
    /// straddling kinks.
    double kink_distance(const SymTensor2& S, const SymTensor2& D) const;

    /// Key-value serialization (kind= plus one key per parameter).
    std::map<std::string, std::string> to_kv() const;
    static BulkRelation from_kv(const std::map<std::string, std::string>& kv);

private:
    BulkRelation() = default;
    void validate();
    double rate_coef_origin() const;

    BulkKind kind_ = BulkKind::custom;
    std::map<std::string, double> params_;
    double growth_ = 2.0;
    Orientation orientation_ = Orientation::stress_explicit;
    CustomBulk custom_;
};

// ---------------------------------------------------------------------------
// Boundary relations g(s, v_tau) = 0
// ---------------------------------------------------------------------------

enum class BoundaryKind {
    navier_slip,
    power_slip,
    regularized_power_slip,
    stick_slip,
    activated_navier_slip,
    custom,
};

std::string to_string(BoundaryKind k);
BoundaryKind boundary_kind_from_string(const std::string& s);

struct CustomBoundary {
    std::function<Vec(const Vec&, const Vec&)> residual;
    std::function<double(double, double)> scalar_residual;
    double growth_exponent = 2.0;
};

class BoundaryRelation {
public:
    BoundaryRelation(BoundaryKind kind, std::map<std::string, double> params);
    static BoundaryRelation custom(CustomBoundary impl);

    BoundaryKind kind() const { return kind_; }
    const std::map<std::string, double>& params() const { return params_; }
    double param(const std::string& name) const;
    double growth_exponent() const { return growth_; }
    double dual_exponent() const { return growth_ / (growth_ - 1.0); }
    bool isotropic() const { return kind_ != BoundaryKind::custom || bool(custom_.scalar_residual); }

    Vec eval(const Vec& s, const Vec& v) const;
    double scalar_residual(double s, double v) const;

    std::optional<Vec> explicit_traction(const Vec& v) const;
    std::optional<Vec> explicit_slip(const Vec& s) const;
    bool has_explicit_traction() const;
    bool has_explicit_slip() const;

    double scalar_traction_from_slip(double v) const;
    double scalar_slip_from_traction(double s) const;

    double kink_distance(const Vec& s, const Vec& v) const;

    std::map<std::string, std::string> to_kv() const;
    static BoundaryRelation from_kv(const std::map<std::string, std::string>& kv);

private:
    BoundaryRelation() = default;
    void validate();

    BoundaryKind kind_ = BoundaryKind::custom;
    std::map<std::string, double> params_;
    double growth_ = 2.0;
    CustomBoundary custom_;
};

// ---------------------------------------------------------------------------
// Dissipation split (power-law identity)
// ---------------------------------------------------------------------------

struct DissipationSplit {
    double total = 0.0;       // S:D
    double rate_part = 0.0;   // (2 nu0 / r) |D|^r
    double stress_part = 0.0; // ((r-1)/(r (2 nu0)^{1/(r-1)})) |S|^{r'}
};

/// Splits S:D for a power-law graph point into its |D|^r and |S|^{r'}
/// parts; rejects pairs that are not on the graph.
DissipationSplit dissipation_split(const BulkRelation& rel, const SymTensor2& S,
                                   const SymTensor2& D, double graph_tol = 1e-8);

/// Monotone scalar root helper: solves f(x) = 0 for increasing f with
/// bracket growth starting from [0, b0]. Shared by the scalar graph maps
/// and the test oracles.
double solve_increasing(const std::function<double(double)>& f, double target, double b0 = 1.0,
                        double tol = 1e-14, int max_iter = 200);

}  // namespace rheo
