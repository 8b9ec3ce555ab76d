#include "rheo/regularization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <tuple>

namespace rheo {

namespace {

// Dense solve of an n x n system (n <= 6), partial pivoting. Returns false
// on a (numerically) singular matrix.
bool solve_dense(int n, double A[6][6], double b[6], double x[6]) {
    int piv[6];
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int c = 0; c < n; ++c) {
        int best = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(A[r][c]) > std::fabs(A[best][c])) best = r;
        if (std::fabs(A[best][c]) < 1e-300) return false;
        if (best != c) {
            for (int k = 0; k < n; ++k) std::swap(A[c][k], A[best][k]);
            std::swap(b[c], b[best]);
        }
        for (int r = c + 1; r < n; ++r) {
            double f = A[r][c] / A[c][c];
            for (int k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
        x[r] = s / A[r][r];
    }
    return true;
}

// Generic damped-Newton root finder over a small component vector.
// eval(x) fills the residual; merit is the plain Euclidean norm of the
// residual components.
template <typename EvalFn>
bool newton_solve(int n, double x[6], const EvalFn& eval, const NewtonSettings& ns,
                  double scale_hint) {
    auto merit = [&](const double* p) {
        double f[6];
        eval(p, f);
        double m = 0.0;
        for (int k = 0; k < n; ++k) m += f[k] * f[k];
        return std::sqrt(m);
    };

    double f[6];
    double contraction_lambda = 0.25;
    for (int it = 0; it < ns.max_iter; ++it) {
        eval(x, f);
        double xn = 0.0;
        for (int k = 0; k < n; ++k) xn += x[k] * x[k];
        xn = std::sqrt(xn);
        double fn = 0.0;
        for (int k = 0; k < n; ++k) fn += f[k] * f[k];
        fn = std::sqrt(fn);
        double tol = ns.tol_abs + ns.tol_rel * (1.0 + xn + scale_hint);
        if (fn <= tol) return true;

        // central-difference Jacobian
        double J[6][6];
        double fp[6], fm[6], xp[6];
        for (int c = 0; c < n; ++c) {
            double h = 1e-7 * (1.0 + std::fabs(x[c]) + scale_hint);
            for (int k = 0; k < n; ++k) xp[k] = x[k];
            xp[c] = x[c] + h;
            eval(xp, fp);
            xp[c] = x[c] - h;
            eval(xp, fm);
            for (int r = 0; r < n; ++r) J[r][c] = (fp[r] - fm[r]) / (2.0 * h);
        }

        double rhs[6], delta[6];
        for (int k = 0; k < n; ++k) rhs[k] = -f[k];
        bool newton_ok = solve_dense(n, J, rhs, delta);

        bool accepted = false;
        if (newton_ok) {
            double t = ns.damping;
            for (int ls = 0; ls < 40 && !accepted; ++ls) {
                double xt[6];
                for (int k = 0; k < n; ++k) xt[k] = x[k] + t * delta[k];
                if (merit(xt) <= (1.0 - 1e-4 * t) * fn) {
                    for (int k = 0; k < n; ++k) x[k] = xt[k];
                    accepted = true;
                } else {
                    t *= 0.5;
                }
            }
        }
        if (!accepted) {
            // contraction fallback: x <- x - lambda f, adapting lambda.
            // G_eps is strongly monotone in its first argument, so a small
            // enough lambda always decreases the residual.
            bool moved = false;
            for (int tries = 0; tries < 60 && !moved; ++tries) {
                double xt[6];
                for (int k = 0; k < n; ++k) xt[k] = x[k] - contraction_lambda * f[k];
                if (merit(xt) < fn) {
                    for (int k = 0; k < n; ++k) x[k] = xt[k];
                    contraction_lambda *= 1.3;
                    moved = true;
                } else {
                    contraction_lambda *= 0.5;
                }
            }
            if (!moved) return false;
        }
    }
    double final_merit = merit(x);
    double xn = 0.0;
    for (int k = 0; k < n; ++k) xn += x[k] * x[k];
    return final_merit <= ns.tol_abs + ns.tol_rel * (1.0 + std::sqrt(xn) + scale_hint);
}

}  // namespace

// ---------------------------------------------------------------------------
// EpsBulkRelation
// ---------------------------------------------------------------------------

EpsBulkRelation::EpsBulkRelation(BulkRelation base, double eps, NewtonSettings newton)
    : base_(std::move(base)), eps_(eps), newton_(newton) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("EpsBulkRelation: eps must lie in (0,1)");
    if (!(newton_.tol_abs > 0.0)) throw std::invalid_argument("newton.tol_abs must be > 0");
}

SymTensor2 EpsBulkRelation::eval(const SymTensor2& S, const SymTensor2& D) const {
    return base_.eval(S - eps_ * D, D - eps_ * S);
}

double EpsBulkRelation::scalar_residual(double s, double d) const {
    return base_.scalar_residual(s - eps_ * d, d - eps_ * s);
}

SymTensor2 EpsBulkRelation::resolve_stress(const SymTensor2& D) const {
    SymTensor2 guess = SymTensor2::zero(D.dim());
    if (auto s0 = base_.explicit_stress(D)) guess = *s0;
    return resolve_stress(D, guess);
}

SymTensor2 EpsBulkRelation::resolve_stress(const SymTensor2& D,
                                           const SymTensor2& initial_guess) const {
    if (!D.finite()) throw std::invalid_argument("resolve_stress: non-finite input");
    const int n = D.ncomp();
    double x[6] = {0, 0, 0, 0, 0, 0};
    for (int k = 0; k < n; ++k) x[k] = initial_guess.comp(k);

    auto eval_fn = [&](const double* p, double* out) {
        SymTensor2 S(D.dim());
        for (int k = 0; k < n; ++k) S.comp(k) = p[k];
        SymTensor2 r = eval(S, D);
        for (int k = 0; k < n; ++k) out[k] = r.comp(k);
    };

    if (!newton_solve(n, x, eval_fn, newton_, frobenius_norm(D))) {
        // retry once from the origin, which is always admissible (S*_eps(0)=0)
        for (int k = 0; k < n; ++k) x[k] = 0.0;
        if (!newton_solve(n, x, eval_fn, newton_, frobenius_norm(D)))
            throw NoConvergence("resolve_stress: no convergence for relation " +
                                to_string(base_.kind()));
    }
    SymTensor2 S(D.dim());
    for (int k = 0; k < n; ++k) S.comp(k) = x[k];
    return S;
}

// ---------------------------------------------------------------------------
// EpsBoundaryRelation
// ---------------------------------------------------------------------------

EpsBoundaryRelation::EpsBoundaryRelation(BoundaryRelation base, double eps, NewtonSettings newton)
    : base_(std::move(base)), eps_(eps), newton_(newton) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("EpsBoundaryRelation: eps must lie in (0,1)");
    if (!(newton_.tol_abs > 0.0)) throw std::invalid_argument("newton.tol_abs must be > 0");
}

Vec EpsBoundaryRelation::eval(const Vec& s, const Vec& v) const {
    return base_.eval(s - eps_ * v, v - eps_ * s);
}

double EpsBoundaryRelation::scalar_residual(double s, double v) const {
    return base_.scalar_residual(s - eps_ * v, v - eps_ * s);
}

Vec EpsBoundaryRelation::resolve_slip(const Vec& v) const {
    Vec guess = Vec::zero(v.dim());
    if (auto s0 = base_.explicit_traction(v)) guess = *s0;
    return resolve_slip(v, guess);
}

Vec EpsBoundaryRelation::resolve_slip(const Vec& v, const Vec& initial_guess) const {
    if (!v.finite()) throw std::invalid_argument("resolve_slip: non-finite input");
    const int n = v.dim();
    double x[6] = {0, 0, 0, 0, 0, 0};
    for (int k = 0; k < n; ++k) x[k] = initial_guess[k];

    auto eval_fn = [&](const double* p, double* out) {
        Vec s(v.dim());
        for (int k = 0; k < n; ++k) s[k] = p[k];
        Vec r = eval(s, v);
        for (int k = 0; k < n; ++k) out[k] = r[k];
    };

    if (!newton_solve(n, x, eval_fn, newton_, norm(v))) {
        for (int k = 0; k < n; ++k) x[k] = 0.0;
        if (!newton_solve(n, x, eval_fn, newton_, norm(v)))
            throw NoConvergence("resolve_slip: no convergence for relation " +
                                to_string(base_.kind()));
    }
    Vec s(v.dim());
    for (int k = 0; k < n; ++k) s[k] = x[k];
    return s;
}

// ---------------------------------------------------------------------------
// Scalar oracle and continuation
// ---------------------------------------------------------------------------

double scalar_oracle_resolve(const EpsBulkRelation& rel, double magnitude) {
    if (!rel.base().isotropic())
        throw std::invalid_argument("scalar_oracle_resolve: isotropic relations only");
    if (magnitude < 0.0) throw std::invalid_argument("scalar_oracle_resolve: magnitude >= 0");
    if (magnitude == 0.0) return 0.0;
    return solve_increasing([&](double s) { return rel.scalar_residual(s, magnitude); }, 0.0,
                            1.0 + magnitude, 1e-15);
}

double scalar_oracle_resolve(const EpsBoundaryRelation& rel, double magnitude) {
    if (!rel.base().isotropic())
        throw std::invalid_argument("scalar_oracle_resolve: isotropic relations only");
    if (magnitude < 0.0) throw std::invalid_argument("scalar_oracle_resolve: magnitude >= 0");
    if (magnitude == 0.0) return 0.0;
    return solve_increasing([&](double s) { return rel.scalar_residual(s, magnitude); }, 0.0,
                            1.0 + magnitude, 1e-15);
}

std::vector<double> default_eps_schedule() {
    return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
}

ContinuationResult continuation_resolve(const BulkRelation& base, const SymTensor2& D,
                                        const std::vector<double>& eps_schedule,
                                        NewtonSettings newton) {
    if (eps_schedule.empty()) throw std::invalid_argument("continuation: empty schedule");
    for (size_t i = 0; i < eps_schedule.size(); ++i) {
        double e = eps_schedule[i];
        if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("continuation: eps out of (0,1)");
        if (e < 1e-8) throw std::invalid_argument("continuation: eps below 1e-8");
        if (i > 0 && !(e < eps_schedule[i - 1]))
            throw std::invalid_argument("continuation: schedule must decrease");
    }
    ContinuationResult out;
    out.stress = SymTensor2::zero(D.dim());
    bool have_prev = false;
    SymTensor2 prev = SymTensor2::zero(D.dim());
    for (double e : eps_schedule) {
        EpsBulkRelation rel(base, e, newton);
        SymTensor2 s = have_prev ? rel.resolve_stress(D, prev) : rel.resolve_stress(D);
        if (have_prev) out.increments.push_back(frobenius_norm(s - prev));
        prev = s;
        have_prev = true;
    }
    out.stress = prev;
    out.cauchy_increment = out.increments.empty() ? 0.0 : out.increments.back();
    return out;
}

// ---------------------------------------------------------------------------
// Resolvent constants
// ---------------------------------------------------------------------------

namespace {

template <typename Resolve, typename Sample, typename Norm, typename Inner>
ResolventConstants estimate_constants_impl(double eps, double r_growth,
                                           const ResolventSampler& sampler, Resolve resolve,
                                           Sample sample, Norm nrm, Inner inr) {
    Rng rng(sampler.seed);
    ResolventConstants out;
    out.eps = eps;
    out.lipschitz = 0.0;
    out.monotone = std::numeric_limits<double>::infinity();

    const double rp = r_growth / (r_growth - 1.0);
    const double es = std::min(2.0, rp);   // stress exponent at the eps level
    const double ed = std::min(2.0, r_growth);
    const double rmax = *std::max_element(sampler.radii.begin(), sampler.radii.end());

    double c1 = std::numeric_limits<double>::infinity();
    struct Pt {
        double sd, f;
    };
    std::vector<Pt> pts;
    pts.reserve(static_cast<size_t>(sampler.pair_count) * 2);

    for (int i = 0; i < sampler.pair_count; ++i) {
        double r1 = sampler.radii[static_cast<size_t>(i) % sampler.radii.size()];
        double r2 = sampler.radii[static_cast<size_t>(i / sampler.radii.size()) %
                                  sampler.radii.size()];
        auto d1 = sample(rng, r1);
        auto d2 = sample(rng, r2);
        auto s1 = resolve(d1);
        auto s2 = resolve(d2);
        auto ds = s1 - s2;
        auto dd = d1 - d2;
        double ndd = nrm(dd);
        if (ndd > 1e-12) {
            out.lipschitz = std::max(out.lipschitz, nrm(ds) / ndd);
            out.monotone = std::min(out.monotone, inr(ds, dd) / (ndd * ndd));
        }
        for (auto [d, s, rr] : {std::tuple{d1, s1, r1}, std::tuple{d2, s2, r2}}) {
            double f = std::pow(nrm(s), es) + std::pow(nrm(d), ed);
            double sd = inr(s, d);
            pts.push_back({sd, f});
            if (rr == rmax && f > 1e-12) c1 = std::min(c1, sd / f);
        }
    }
    if (!std::isfinite(c1) || c1 < 0.0) c1 = 0.0;
    double c2 = 0.0;
    for (const auto& p : pts) c2 = std::max(c2, c1 * p.f - p.sd);
    out.coercivity_c1 = c1;
    out.coercivity_c2 = c2;
    if (!std::isfinite(out.monotone)) out.monotone = 0.0;
    return out;
}

}  // namespace

ResolventConstants estimate_resolvent_constants(const EpsBulkRelation& rel,
                                                const ResolventSampler& sampler) {
    return estimate_constants_impl(
        rel.eps(), rel.base().growth_exponent(), sampler,
        [&](const SymTensor2& d) { return rel.resolve_stress(d); },
        [&](Rng& rng, double r) { return rng.shell_tensor(sampler.dim, r); },
        [](const SymTensor2& t) { return frobenius_norm(t); },
        [](const SymTensor2& a, const SymTensor2& b) { return inner(a, b); });
}

ResolventConstants estimate_resolvent_constants(const EpsBoundaryRelation& rel,
                                                const ResolventSampler& sampler) {
    return estimate_constants_impl(
        rel.eps(), rel.base().growth_exponent(), sampler,
        [&](const Vec& v) { return rel.resolve_slip(v); },
        [&](Rng& rng, double r) { return rng.shell_vec(sampler.dim, r); },
        [](const Vec& v) { return norm(v); },
        [](const Vec& a, const Vec& b) { return dot(a, b); });
}

}  // namespace rheo
