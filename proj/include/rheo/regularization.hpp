#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "rheo/relations.hpp"
#include "rheo/rng.hpp"
#include "rheo/tensor.hpp"

namespace rheo {

/// Thrown when a resolvent solve does not reach tolerance; signals a
/// relation outside the admissible class rather than a recoverable state.
struct NoConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NewtonSettings {
    int max_iter = 200;
    double tol_abs = 1e-13;
    double tol_rel = 1e-13;
    double damping = 1.0;  // initial step scale before Armijo backtracking
};

/// G_eps(S, D) := G(S - eps D, D - eps S); single-valued Lipschitz monotone
/// stress map for any admissible base relation.
class EpsBulkRelation {
public:
    EpsBulkRelation(BulkRelation base, double eps, NewtonSettings newton = {});

    const BulkRelation& base() const { return base_; }
    double eps() const { return eps_; }
    const NewtonSettings& newton() const { return newton_; }

    SymTensor2 eval(const SymTensor2& S, const SymTensor2& D) const;
    double scalar_residual(double s, double d) const;

    /// S*_eps(D): damped Newton with Armijo backtracking on |G_eps|^2 and a
    /// monotone-contraction fallback at kinks. Deterministic for a fixed
    /// initial guess.
    SymTensor2 resolve_stress(const SymTensor2& D) const;
    SymTensor2 resolve_stress(const SymTensor2& D, const SymTensor2& initial_guess) const;

private:
    BulkRelation base_;
    double eps_;
    NewtonSettings newton_;
};

class EpsBoundaryRelation {
public:
    EpsBoundaryRelation(BoundaryRelation base, double eps, NewtonSettings newton = {});

    const BoundaryRelation& base() const { return base_; }
    double eps() const { return eps_; }
    const NewtonSettings& newton() const { return newton_; }

    Vec eval(const Vec& s, const Vec& v) const;
    double scalar_residual(double s, double v) const;

    Vec resolve_slip(const Vec& v) const;
    Vec resolve_slip(const Vec& v, const Vec& initial_guess) const;

private:
    BoundaryRelation base_;
    double eps_;
    NewtonSettings newton_;
};

inline EpsBulkRelation make_eps_bulk(BulkRelation base, double eps, NewtonSettings n = {}) {
    return EpsBulkRelation(std::move(base), eps, n);
}
inline EpsBoundaryRelation make_eps_boundary(BoundaryRelation base, double eps,
                                             NewtonSettings n = {}) {
    return EpsBoundaryRelation(std::move(base), eps, n);
}

/// Ground-truth |S| for a collinear input of the given magnitude: bisection
/// with bracket growth on the scalar reduction. Test oracle for the tensor
/// Newton path; isotropic relations only.
double scalar_oracle_resolve(const EpsBulkRelation& rel, double magnitude);
double scalar_oracle_resolve(const EpsBoundaryRelation& rel, double magnitude);

struct ContinuationResult {
    SymTensor2 stress;
    double cauchy_increment = 0.0;  // |S(eps_k) - S(eps_{k-1})| of the last stage
    std::vector<double> increments;
};

/// Warm-started eps -> 0 continuation realizing a pointwise selection
/// S with G(S, D) = 0.
ContinuationResult continuation_resolve(const BulkRelation& base, const SymTensor2& D,
                                        const std::vector<double>& eps_schedule,
                                        NewtonSettings newton = {});

/// Default geometric schedule {1e-1, ..., 1e-6}.
std::vector<double> default_eps_schedule();

struct ResolventConstants {
    double eps = 0.0;
    double lipschitz = 0.0;        // C1(eps) = max |dS*| / |dD|
    double monotone = 0.0;         // C2(eps) = min (dS* : dD) / |dD|^2
    double coercivity_c1 = 0.0;    // S*:D >= c1 (|S|^min(2,r') + |D|^min(2,r)) - c2
    double coercivity_c2 = 0.0;
};

struct ResolventSampler {
    uint64_t seed = 0;
    int pair_count = 512;
    std::vector<double> radii = {0.1, 1.0, 10.0};
    int dim = 2;
};

ResolventConstants estimate_resolvent_constants(const EpsBulkRelation& rel,
                                                const ResolventSampler& sampler);
ResolventConstants estimate_resolvent_constants(const EpsBoundaryRelation& rel,
                                                const ResolventSampler& sampler);

}  // namespace rheo
