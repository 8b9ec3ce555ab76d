#include "rheo/admissibility.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "rheo/rng.hpp"

namespace rheo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || n < 4) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    int nt = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nt));
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&, t]() {
            for (int i = t; i < n; i += nt) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Orthonormal basis of Sym(d) w.r.t. the Frobenius inner product.
std::vector<SymTensor2> sym_basis(int dim) {
    std::vector<SymTensor2> b;
    int nc = dim * (dim + 1) / 2;
    const double isq2 = 1.0 / std::sqrt(2.0);
    for (int k = 0; k < nc; ++k) {
        SymTensor2 e(dim);
        e.comp(k) = k < dim ? 1.0 : isq2;
        b.push_back(e);
    }
    return b;
}

// coordinates of T in the orthonormal basis above
void sym_coords(const SymTensor2& t, double* out) {
    const double sq2 = std::sqrt(2.0);
    for (int k = 0; k < t.ncomp(); ++k) out[k] = k < t.dim() ? t.comp(k) : sq2 * t.comp(k);
}

// eigenvalue range of the symmetric part of a d x d matrix (d <= 3)
void sym_eig_range(const double m[3][3], int d, double& lo, double& hi) {
    double a[3][3];
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a[i][j] = 0.5 * (m[i][j] + m[j][i]);
    if (d == 1) {
        lo = hi = a[0][0];
        return;
    }
    if (d == 2) {
        double mean = 0.5 * (a[0][0] + a[1][1]);
        double rad = std::sqrt(0.25 * (a[0][0] - a[1][1]) * (a[0][0] - a[1][1]) +
                               a[0][1] * a[0][1]);
        lo = mean - rad;
        hi = mean + rad;
        return;
    }
    // Smith's closed form for 3x3 symmetric matrices
    double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if (p1 < 1e-300) {
        lo = std::min({a[0][0], a[1][1], a[2][2]});
        hi = std::max({a[0][0], a[1][1], a[2][2]});
        return;
    }
    double p2 = 0.0;
    for (int i = 0; i < 3; ++i) p2 += (a[i][i] - q) * (a[i][i] - q);
    p2 += 2.0 * p1;
    double p = std::sqrt(p2 / 6.0);
    double B[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) B[i][j] = (a[i][j] - (i == j ? q : 0.0)) / p;
    double detB = B[0][0] * (B[1][1] * B[2][2] - B[1][2] * B[2][1]) -
                  B[0][1] * (B[1][0] * B[2][2] - B[1][2] * B[2][0]) +
                  B[0][2] * (B[1][0] * B[2][1] - B[1][1] * B[2][0]);
    double r = std::clamp(detB / 2.0, -1.0, 1.0);
    double phi = std::acos(r) / 3.0;
    double e1 = q + 2.0 * p * std::cos(phi);
    double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    lo = e3;
    hi = e1;
}

void append_tensor(std::vector<double>& out, const SymTensor2& t) {
    for (int k = 0; k < t.ncomp(); ++k) out.push_back(t.comp(k));
}
void append_vec(std::vector<double>& out, const Vec& v) {
    for (int i = 0; i < v.dim(); ++i) out.push_back(v[i]);
}

SymTensor2 grid_tensor(int dim, int idx, double radius) {
    auto basis = sym_basis(dim);
    int nb = static_cast<int>(basis.size());
    SymTensor2 t = basis[static_cast<size_t>(idx % nb)];
    if ((idx / nb) % 2 == 1) {
        // mixed direction
        t += basis[static_cast<size_t>((idx + 1) % nb)];
        t *= 1.0 / frobenius_norm(t);
    }
    if ((idx / (2 * nb)) % 2 == 1) t *= -1.0;
    return radius * t;
}

Vec grid_vec(int dim, int idx, double radius) {
    Vec v(dim);
    v[idx % dim] = 1.0;
    if ((idx / dim) % 2 == 1) {
        v[(idx + 1) % dim] += 1.0;
        v *= 1.0 / norm(v);
    }
    if ((idx / (2 * dim)) % 2 == 1) v *= -1.0;
    return radius * v;
}

}  // namespace

void Sampler::validate() const {
    if (count < 1) throw std::invalid_argument("sampler: count must be >= 1");
    if (radius_schedule.empty()) throw std::invalid_argument("sampler: empty radius schedule");
    for (size_t i = 0; i < radius_schedule.size(); ++i) {
        if (radius_schedule[i] <= 0.0)
            throw std::invalid_argument("sampler: radii must be positive");
        if (i > 0 && radius_schedule[i] <= radius_schedule[i - 1])
            throw std::invalid_argument("sampler: radii must be strictly increasing");
    }
    if (dim != 2 && dim != 3) throw std::invalid_argument("sampler: dim must be 2 or 3");
}

std::string to_string(Condition c) {
    switch (c) {
        case Condition::G1: return "G1";
        case Condition::G2: return "G2";
        case Condition::G2star: return "G2star";
        case Condition::G3: return "G3";
        case Condition::G4: return "G4";
    }
    return "G1";
}

// ---------------------------------------------------------------------------
// Graph sampling
// ---------------------------------------------------------------------------

void sample_graph_point(const BulkRelation& rel, Rng& rng, double radius, SymTensor2& S,
                        SymTensor2& D, int dim) {
    if (rel.has_explicit_stress()) {
        D = rng.shell_tensor(dim, radius);
        S = *rel.explicit_stress(D);
        return;
    }
    if (rel.has_explicit_rate()) {
        S = rng.shell_tensor(dim, radius);
        D = *rel.explicit_rate(S);
        return;
    }
    // collinear scalar branch
    SymTensor2 u = rng.shell_tensor(dim, 1.0);
    u *= 1.0 / frobenius_norm(u);
    double d = radius * rng.uniform(0.8, 1.2);
    double s = rel.scalar_stress_from_rate(d);
    S = s * u;
    D = d * u;
}

void sample_graph_point(const BoundaryRelation& rel, Rng& rng, double radius, Vec& s, Vec& v,
                        int dim) {
    if (rel.has_explicit_traction()) {
        v = rng.shell_vec(dim, radius);
        s = *rel.explicit_traction(v);
        return;
    }
    if (rel.has_explicit_slip()) {
        s = rng.shell_vec(dim, radius);
        v = *rel.explicit_slip(s);
        return;
    }
    Vec u = rng.shell_vec(dim, 1.0);
    u *= 1.0 / norm(u);
    double vm = radius * rng.uniform(0.8, 1.2);
    double sm = rel.scalar_traction_from_slip(vm);
    s = sm * u;
    v = vm * u;
}

// ---------------------------------------------------------------------------
// Lipschitz (G1 / g1)
// ---------------------------------------------------------------------------

namespace {

// Generic Lipschitz estimate over a joint point space of dimension 2*n.
// eval maps a pair (first, second) to a residual; the caller supplies
// samplers and norms through lambdas.
template <typename Point, typename SampleFn, typename PerturbFn, typename EvalFn,
          typename DistFn, typename WitnessFn>
AdmissibilityReport lipschitz_impl(const Sampler& sampler, SampleFn sample, PerturbFn perturb,
                                   EvalFn eval, DistFn dist, WitnessFn witness) {
    sampler.validate();
    Rng rng(sampler.seed + 1);
    const auto& radii = sampler.radius_schedule;

    struct Pair {
        Point a, b;
        double radius;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<size_t>(sampler.count));
    for (int i = 0; i < sampler.count; ++i) {
        double r = radii[static_cast<size_t>(i) % radii.size()];
        Point a = sample(rng, r, i);
        Point b;
        if (i % 2 == 0) {
            b = perturb(rng, a, 1e-3 * (1.0 + r));
        } else {
            double r2 = radii[static_cast<size_t>(i / 2) % radii.size()];
            b = sample(rng, r2, i);
        }
        pairs.push_back({a, b, r});
    }

    std::vector<double> slope(pairs.size(), 0.0);
    std::vector<char> finite(pairs.size(), 1);
    parallel_for(static_cast<int>(pairs.size()), sampler.threads, [&](int i) {
        const auto& p = pairs[static_cast<size_t>(i)];
        double num = 0.0;
        bool ok = true;
        try {
            num = eval(p.a, p.b);
        } catch (const std::exception&) {
            ok = false;
        }
        double den = dist(p.a, p.b);
        if (!ok || !std::isfinite(num)) {
            finite[static_cast<size_t>(i)] = 0;
        } else {
            slope[static_cast<size_t>(i)] = den > 1e-14 ? num / den : 0.0;
        }
    });

    AdmissibilityReport rep;
    rep.condition = Condition::G1;
    std::map<double, double> shell_max;
    double L = 0.0;
    int worst = -1;
    bool all_finite = true;
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (!finite[i]) {
            all_finite = false;
            worst = static_cast<int>(i);
            break;
        }
        if (slope[i] >= L) {
            L = slope[i];
            worst = static_cast<int>(i);
        }
        auto& sm = shell_max[pairs[i].radius];
        sm = std::max(sm, slope[i]);
    }
    rep.passed = all_finite;
    rep.estimated_constants["L"] = L;
    if (!shell_max.empty()) {
        double lf = shell_max.begin()->second, ll = shell_max.rbegin()->second;
        rep.estimated_constants["L_shell_first"] = lf;
        rep.estimated_constants["L_shell_last"] = ll;
        double growth = lf > 1e-14 ? ll / lf : 0.0;
        rep.estimated_constants["growth_ratio"] = growth;
        if (growth > 2.0) rep.flags.push_back("slope_growth");
    }
    if (!all_finite) rep.flags.push_back("non_finite_evaluation");
    if (worst >= 0) witness(pairs[static_cast<size_t>(worst)].a,
                            pairs[static_cast<size_t>(worst)].b, rep);
    return rep;
}

}  // namespace

AdmissibilityReport check_lipschitz(const BulkRelation& rel, const Sampler& sampler) {
    using Point = std::pair<SymTensor2, SymTensor2>;
    auto sample = [&](Rng& rng, double r, int idx) -> Point {
        if (sampler.distribution == SampleDistribution::grid)
            return {grid_tensor(sampler.dim, idx, r), grid_tensor(sampler.dim, idx + 3, r)};
        return {rng.shell_tensor(sampler.dim, r), rng.shell_tensor(sampler.dim, r)};
    };
    auto perturb = [&](Rng& rng, const Point& p, double h) -> Point {
        return {p.first + rng.shell_tensor(sampler.dim, h), p.second + rng.shell_tensor(sampler.dim, h)};
    };
    auto eval = [&](const Point& a, const Point& b) {
        return frobenius_norm(rel.eval(a.first, a.second) - rel.eval(b.first, b.second));
    };
    auto dist = [](const Point& a, const Point& b) {
        double ds = frobenius_norm(a.first - b.first);
        double dd = frobenius_norm(a.second - b.second);
        return std::sqrt(ds * ds + dd * dd);
    };
    auto witness = [](const Point& a, const Point& b, AdmissibilityReport& rep) {
        rep.witness_layout = "S1,D1,S2,D2";
        append_tensor(rep.worst_witness, a.first);
        append_tensor(rep.worst_witness, a.second);
        append_tensor(rep.worst_witness, b.first);
        append_tensor(rep.worst_witness, b.second);
    };
    return lipschitz_impl<Point>(sampler, sample, perturb, eval, dist, witness);
}

AdmissibilityReport check_lipschitz(const BoundaryRelation& rel, const Sampler& sampler) {
    using Point = std::pair<Vec, Vec>;
    auto sample = [&](Rng& rng, double r, int idx) -> Point {
        if (sampler.distribution == SampleDistribution::grid)
            return {grid_vec(sampler.dim, idx, r), grid_vec(sampler.dim, idx + 1, r)};
        return {rng.shell_vec(sampler.dim, r), rng.shell_vec(sampler.dim, r)};
    };
    auto perturb = [&](Rng& rng, const Point& p, double h) -> Point {
        return {p.first + rng.shell_vec(sampler.dim, h), p.second + rng.shell_vec(sampler.dim, h)};
    };
    auto eval = [&](const Point& a, const Point& b) {
        return norm(rel.eval(a.first, a.second) - rel.eval(b.first, b.second));
    };
    auto dist = [](const Point& a, const Point& b) {
        double ds = norm(a.first - b.first);
        double dv = norm(a.second - b.second);
        return std::sqrt(ds * ds + dv * dv);
    };
    auto witness = [](const Point& a, const Point& b, AdmissibilityReport& rep) {
        rep.witness_layout = "s1,v1,s2,v2";
        append_vec(rep.worst_witness, a.first);
        append_vec(rep.worst_witness, a.second);
        append_vec(rep.worst_witness, b.first);
        append_vec(rep.worst_witness, b.second);
    };
    return lipschitz_impl<Point>(sampler, sample, perturb, eval, dist, witness);
}

// ---------------------------------------------------------------------------
// Derivative signs (G2 / g2)
// ---------------------------------------------------------------------------

AdmissibilityReport check_derivative_signs(const BulkRelation& rel, const Sampler& sampler,
                                           double fd_step) {
    sampler.validate();
    if (!(fd_step > 0.0)) throw std::invalid_argument("fd_step must be > 0");
    Rng rng(sampler.seed + 2);
    const auto& radii = sampler.radius_schedule;
    const auto basis = sym_basis(sampler.dim);
    const int nc = static_cast<int>(basis.size());

    struct PointData {
        SymTensor2 S, D;
        double h;
        bool valid = false;
    };
    std::vector<PointData> pts(static_cast<size_t>(sampler.count));
    int excluded = 0;
    for (int i = 0; i < sampler.count; ++i) {
        double r = radii[static_cast<size_t>(i) % radii.size()];
        PointData pd;
        for (int attempt = 0; attempt < 50; ++attempt) {
            pd.S = sampler.distribution == SampleDistribution::grid
                       ? grid_tensor(sampler.dim, i + attempt, r)
                       : rng.shell_tensor(sampler.dim, r);
            pd.D = sampler.distribution == SampleDistribution::grid
                       ? grid_tensor(sampler.dim, i + attempt + 2, r)
                       : rng.shell_tensor(sampler.dim, r);
            double scale = 1.0 + frobenius_norm(pd.S) + frobenius_norm(pd.D);
            pd.h = fd_step * scale;
            if (rel.kink_distance(pd.S, pd.D) >= 12.0 * pd.h) {
                pd.valid = true;
                break;
            }
        }
        if (!pd.valid) ++excluded;
        pts[static_cast<size_t>(i)] = pd;
    }

    // pre-draw probe directions (unit vectors in basis coordinates)
    std::vector<std::array<double, 6>> probes(static_cast<size_t>(sampler.probe_count));
    for (auto& p : probes) {
        double n2 = 0.0;
        for (int k = 0; k < nc; ++k) {
            p[static_cast<size_t>(k)] = rng.normal();
            n2 += p[static_cast<size_t>(k)] * p[static_cast<size_t>(k)];
        }
        double inv = 1.0 / std::sqrt(std::max(n2, 1e-30));
        for (int k = 0; k < nc; ++k) p[static_cast<size_t>(k)] *= inv;
    }

    struct Margins {
        double min_qS = kInf, max_qD = -kInf, min_strict = kInf, max_prod = -kInf;
    };
    std::vector<Margins> marg(pts.size());

    parallel_for(static_cast<int>(pts.size()), sampler.threads, [&](int i) {
        const auto& pd = pts[static_cast<size_t>(i)];
        if (!pd.valid) return;
        double MS[6][6], MD[6][6];
        for (int l = 0; l < nc; ++l) {
            SymTensor2 ep = rel.eval(pd.S + pd.h * basis[static_cast<size_t>(l)], pd.D);
            SymTensor2 em = rel.eval(pd.S - pd.h * basis[static_cast<size_t>(l)], pd.D);
            SymTensor2 dcol = (1.0 / (2.0 * pd.h)) * (ep - em);
            double col[6];
            sym_coords(dcol, col);
            for (int k = 0; k < nc; ++k) MS[k][l] = col[k];

            ep = rel.eval(pd.S, pd.D + pd.h * basis[static_cast<size_t>(l)]);
            em = rel.eval(pd.S, pd.D - pd.h * basis[static_cast<size_t>(l)]);
            dcol = (1.0 / (2.0 * pd.h)) * (ep - em);
            sym_coords(dcol, col);
            for (int k = 0; k < nc; ++k) MD[k][l] = col[k];
        }
        Margins m;
        for (const auto& x : probes) {
            double ys[6], yd[6];
            for (int k = 0; k < nc; ++k) {
                ys[k] = yd[k] = 0.0;
                for (int l = 0; l < nc; ++l) {
                    ys[k] += MS[k][l] * x[static_cast<size_t>(l)];
                    yd[k] += MD[k][l] * x[static_cast<size_t>(l)];
                }
            }
            double qS = 0.0, qD = 0.0;
            for (int k = 0; k < nc; ++k) {
                qS += x[static_cast<size_t>(k)] * ys[k];
                qD += x[static_cast<size_t>(k)] * yd[k];
            }
            // (dG/dD)(dG/dS)^T probe: (MD^T x) . (MS^T x)
            double prod = 0.0;
            for (int l = 0; l < nc; ++l) {
                double as = 0.0, ad = 0.0;
                for (int k = 0; k < nc; ++k) {
                    as += MS[k][l] * x[static_cast<size_t>(k)];
                    ad += MD[k][l] * x[static_cast<size_t>(k)];
                }
                prod += as * ad;
            }
            m.min_qS = std::min(m.min_qS, qS);
            m.max_qD = std::max(m.max_qD, qD);
            m.min_strict = std::min(m.min_strict, qS - qD);
            m.max_prod = std::max(m.max_prod, prod);
        }
        marg[static_cast<size_t>(i)] = m;
    });

    AdmissibilityReport rep;
    rep.condition = Condition::G2;
    Margins total;
    int w1 = -1, w2 = -1, w3 = -1, w4 = -1;
    for (size_t i = 0; i < pts.size(); ++i) {
        if (!pts[i].valid) continue;
        const auto& m = marg[i];
        if (m.min_qS < total.min_qS) { total.min_qS = m.min_qS; w1 = static_cast<int>(i); }
        if (m.max_qD > total.max_qD) { total.max_qD = m.max_qD; w2 = static_cast<int>(i); }
        if (m.min_strict < total.min_strict) { total.min_strict = m.min_strict; w3 = static_cast<int>(i); }
        if (m.max_prod > total.max_prod) { total.max_prod = m.max_prod; w4 = static_cast<int>(i); }
    }
    rep.estimated_constants["dGdS_min_quotient"] = total.min_qS;
    rep.estimated_constants["dGdD_max_quotient"] = total.max_qD;
    rep.estimated_constants["strict_min_quotient"] = total.min_strict;
    rep.estimated_constants["product_max_quotient"] = total.max_prod;
    rep.estimated_constants["excluded_points"] = excluded;
    bool ok1 = total.min_qS >= -kSignTol;
    bool ok2 = total.max_qD <= kSignTol;
    bool ok3 = total.min_strict > kSignTol;
    bool ok4 = total.max_prod <= kSignTol;
    rep.passed = ok1 && ok2 && ok3 && ok4;
    int w = !ok1 ? w1 : (!ok2 ? w2 : (!ok3 ? w3 : (!ok4 ? w4 : w1)));
    if (w >= 0) {
        rep.witness_layout = "S,D";
        append_tensor(rep.worst_witness, pts[static_cast<size_t>(w)].S);
        append_tensor(rep.worst_witness, pts[static_cast<size_t>(w)].D);
    }
    if (excluded > 0) rep.flags.push_back("kink_points_excluded");
    return rep;
}

AdmissibilityReport check_derivative_signs(const BoundaryRelation& rel, const Sampler& sampler,
                                           double fd_step) {
    sampler.validate();
    if (!(fd_step > 0.0)) throw std::invalid_argument("fd_step must be > 0");
    Rng rng(sampler.seed + 2);
    const auto& radii = sampler.radius_schedule;
    const int d = sampler.dim;

    struct PointData {
        Vec s, v;
        double h;
        bool valid = false;
    };
    std::vector<PointData> pts(static_cast<size_t>(sampler.count));
    int excluded = 0;
    for (int i = 0; i < sampler.count; ++i) {
        double r = radii[static_cast<size_t>(i) % radii.size()];
        PointData pd;
        for (int attempt = 0; attempt < 50; ++attempt) {
            pd.s = sampler.distribution == SampleDistribution::grid
                       ? grid_vec(d, i + attempt, r)
                       : rng.shell_vec(d, r);
            pd.v = sampler.distribution == SampleDistribution::grid
                       ? grid_vec(d, i + attempt + 1, r)
                       : rng.shell_vec(d, r);
            pd.h = fd_step * (1.0 + norm(pd.s) + norm(pd.v));
            if (rel.kink_distance(pd.s, pd.v) >= 12.0 * pd.h) {
                pd.valid = true;
                break;
            }
        }
        if (!pd.valid) ++excluded;
        pts[static_cast<size_t>(i)] = pd;
    }

    struct Margins {
        double min_s = kInf, max_v = -kInf, min_strict = kInf, max_prod = -kInf;
    };
    std::vector<Margins> marg(pts.size());

    parallel_for(static_cast<int>(pts.size()), sampler.threads, [&](int i) {
        const auto& pd = pts[static_cast<size_t>(i)];
        if (!pd.valid) return;
        double Js[3][3], Jv[3][3];
        for (int c = 0; c < d; ++c) {
            Vec e(d);
            e[c] = pd.h;
            Vec gp = rel.eval(pd.s + e, pd.v), gm = rel.eval(pd.s - e, pd.v);
            for (int r2 = 0; r2 < d; ++r2) Js[r2][c] = (gp[r2] - gm[r2]) / (2.0 * pd.h);
            gp = rel.eval(pd.s, pd.v + e);
            gm = rel.eval(pd.s, pd.v - e);
            for (int r2 = 0; r2 < d; ++r2) Jv[r2][c] = (gp[r2] - gm[r2]) / (2.0 * pd.h);
        }
        Margins m;
        double lo, hi;
        sym_eig_range(Js, d, lo, hi);
        m.min_s = lo;
        sym_eig_range(Jv, d, lo, hi);
        m.max_v = hi;
        double diff[3][3], prod[3][3];
        for (int r2 = 0; r2 < d; ++r2)
            for (int c = 0; c < d; ++c) {
                diff[r2][c] = Js[r2][c] - Jv[r2][c];
                prod[r2][c] = 0.0;
                for (int k = 0; k < d; ++k) prod[r2][c] += Jv[r2][k] * Js[c][k];
            }
        sym_eig_range(diff, d, lo, hi);
        m.min_strict = lo;
        sym_eig_range(prod, d, lo, hi);
        m.max_prod = hi;
        marg[static_cast<size_t>(i)] = m;
    });

    AdmissibilityReport rep;
    rep.condition = Condition::G2;
    Margins total;
    int w = -1;
    for (size_t i = 0; i < pts.size(); ++i) {
        if (!pts[i].valid) continue;
        const auto& m = marg[i];
        bool worse = m.min_s < total.min_s || m.max_v > total.max_v ||
                     m.min_strict < total.min_strict || m.max_prod > total.max_prod;
        total.min_s = std::min(total.min_s, m.min_s);
        total.max_v = std::max(total.max_v, m.max_v);
        total.min_strict = std::min(total.min_strict, m.min_strict);
        total.max_prod = std::max(total.max_prod, m.max_prod);
        if (worse) w = static_cast<int>(i);
    }
    rep.estimated_constants["dgds_min_eig"] = total.min_s;
    rep.estimated_constants["dgdv_max_eig"] = total.max_v;
    rep.estimated_constants["strict_min_eig"] = total.min_strict;
    rep.estimated_constants["product_max_eig"] = total.max_prod;
    rep.estimated_constants["excluded_points"] = excluded;
    rep.passed = total.min_s >= -kSignTol && total.max_v <= kSignTol &&
                 total.min_strict > kSignTol && total.max_prod <= kSignTol;
    if (w >= 0) {
        rep.witness_layout = "s,v";
        append_vec(rep.worst_witness, pts[static_cast<size_t>(w)].s);
        append_vec(rep.worst_witness, pts[static_cast<size_t>(w)].v);
    }
    if (excluded > 0) rep.flags.push_back("kink_points_excluded");
    return rep;
}

// ---------------------------------------------------------------------------
// Graph monotonicity (G2* / g2*)
// ---------------------------------------------------------------------------

AdmissibilityReport check_graph_monotone(const BulkRelation& rel, const Sampler& sampler) {
    sampler.validate();
    Rng rng(sampler.seed + 3);
    const auto& radii = sampler.radius_schedule;
    AdmissibilityReport rep;
    rep.condition = Condition::G2star;
    double worst = kInf;
    for (int i = 0; i < sampler.count; ++i) {
        double r1 = radii[static_cast<size_t>(i) % radii.size()];
        double r2 = radii[static_cast<size_t>(i / 2) % radii.size()];
        SymTensor2 S1(sampler.dim), D1(sampler.dim), S2(sampler.dim), D2(sampler.dim);
        sample_graph_point(rel, rng, r1, S1, D1, sampler.dim);
        sample_graph_point(rel, rng, r2, S2, D2, sampler.dim);
        double prod = inner(S1 - S2, D1 - D2);
        double scale = 1.0 + frobenius_norm(S1 - S2) * frobenius_norm(D1 - D2);
        double margin = prod / scale;
        if (margin < worst) {
            worst = margin;
            rep.worst_witness.clear();
            rep.witness_layout = "S1,D1,S2,D2";
            append_tensor(rep.worst_witness, S1);
            append_tensor(rep.worst_witness, D1);
            append_tensor(rep.worst_witness, S2);
            append_tensor(rep.worst_witness, D2);
        }
    }
    rep.estimated_constants["min_normalized_product"] = worst;
    rep.passed = worst >= -kSignTol;
    return rep;
}

AdmissibilityReport check_graph_monotone(const BoundaryRelation& rel, const Sampler& sampler) {
    sampler.validate();
    Rng rng(sampler.seed + 3);
    const auto& radii = sampler.radius_schedule;
    AdmissibilityReport rep;
    rep.condition = Condition::G2star;
    double worst = kInf;
    for (int i = 0; i < sampler.count; ++i) {
        double r1 = radii[static_cast<size_t>(i) % radii.size()];
        double r2 = radii[static_cast<size_t>(i / 2) % radii.size()];
        Vec s1(sampler.dim), v1(sampler.dim), s2(sampler.dim), v2(sampler.dim);
        sample_graph_point(rel, rng, r1, s1, v1, sampler.dim);
        sample_graph_point(rel, rng, r2, s2, v2, sampler.dim);
        double prod = dot(s1 - s2, v1 - v2);
        double scale = 1.0 + norm(s1 - s2) * norm(v1 - v2);
        double margin = prod / scale;
        if (margin < worst) {
            worst = margin;
            rep.worst_witness.clear();
            rep.witness_layout = "s1,v1,s2,v2";
            append_vec(rep.worst_witness, s1);
            append_vec(rep.worst_witness, v1);
            append_vec(rep.worst_witness, s2);
            append_vec(rep.worst_witness, v2);
        }
    }
    rep.estimated_constants["min_normalized_product"] = worst;
    rep.passed = worst >= -kSignTol;
    return rep;
}

// ---------------------------------------------------------------------------
// Asymptotics (G3 / g3)
// ---------------------------------------------------------------------------

namespace {

enum class BranchStatus { good, bad, unclear };

// values v_k along increasing radii; want a stable positive trend
BranchStatus classify_trend(const std::vector<double>& vals, bool want_positive) {
    double last = vals.back();
    double prev = vals[vals.size() - 2];
    double sgn = want_positive ? 1.0 : -1.0;
    double a = sgn * last, b = sgn * prev;
    if (a > kSignTol && a >= b - kSignTol * (1.0 + std::fabs(a))) return BranchStatus::good;
    if (a < -kSignTol) return BranchStatus::bad;
    if (std::fabs(last) <= kSignTol && std::fabs(prev) <= kSignTol) return BranchStatus::bad;
    return BranchStatus::unclear;
}

template <typename EvalS, typename EvalD>
AdmissibilityReport asymptotics_impl(int ray_count, const std::vector<double>& radii,
                                     uint64_t seed, EvalS eval_s_branch, EvalD eval_d_branch) {
    if (ray_count < 1) throw std::invalid_argument("check_asymptotics: ray_count >= 1");
    if (radii.size() < 3 || radii.back() / radii.front() < 100.0)
        throw std::invalid_argument("check_asymptotics: need increasing radii over >= 3 shells spanning decades");
    for (size_t i = 1; i < radii.size(); ++i)
        if (radii[i] <= radii[i - 1])
            throw std::invalid_argument("check_asymptotics: radii must increase");

    Rng rng(seed + 4);
    BranchStatus s_status = BranchStatus::good, d_status = BranchStatus::good;
    AdmissibilityReport rep;
    rep.condition = Condition::G3;
    double s_min_last = kInf, d_max_last = -kInf;
    for (int ray = 0; ray < ray_count; ++ray) {
        std::vector<double> vs, vd;
        for (double r : radii) {
            vs.push_back(eval_s_branch(rng, ray, r));
            vd.push_back(eval_d_branch(rng, ray, r));
        }
        auto merge = [](BranchStatus agg, BranchStatus c) {
            if (agg == BranchStatus::bad || c == BranchStatus::bad) return BranchStatus::bad;
            if (agg == BranchStatus::unclear || c == BranchStatus::unclear)
                return BranchStatus::unclear;
            return BranchStatus::good;
        };
        s_status = merge(s_status, classify_trend(vs, true));
        d_status = merge(d_status, classify_trend(vd, false));
        s_min_last = std::min(s_min_last, vs.back());
        d_max_last = std::max(d_max_last, vd.back());
    }
    rep.estimated_constants["s_branch_min_last"] = s_min_last;
    rep.estimated_constants["d_branch_max_last"] = d_max_last;
    rep.passed = s_status == BranchStatus::good || d_status == BranchStatus::good;
    if (!rep.passed) {
        if (s_status == BranchStatus::bad && d_status == BranchStatus::bad)
            rep.flags.push_back("both_branches_fail");
        else
            rep.flags.push_back("inconclusive");
    } else {
        rep.flags.push_back(s_status == BranchStatus::good ? "s_branch" : "d_branch");
    }
    return rep;
}

}  // namespace

AdmissibilityReport check_asymptotics(const BulkRelation& rel, int ray_count,
                                      const std::vector<double>& radius_schedule) {
    const int dim = 2;
    // per-ray fixed arguments and directions are drawn once
    struct Ray {
        SymTensor2 dir, fixed;
    };
    std::vector<Ray> rays;
    Rng setup(9001);
    for (int i = 0; i < ray_count; ++i) {
        SymTensor2 u = setup.shell_tensor(dim, 1.0);
        u *= 1.0 / frobenius_norm(u);
        rays.push_back({u, setup.shell_tensor(dim, 1.0)});
    }
    auto evs = [&](Rng&, int ray, double r) {
        const auto& R = rays[static_cast<size_t>(ray)];
        SymTensor2 S = r * R.dir;
        return inner(rel.eval(S, R.fixed), S);
    };
    auto evd = [&](Rng&, int ray, double r) {
        const auto& R = rays[static_cast<size_t>(ray)];
        SymTensor2 D = r * R.dir;
        return inner(rel.eval(R.fixed, D), D);
    };
    return asymptotics_impl(ray_count, radius_schedule, 0, evs, evd);
}

AdmissibilityReport check_asymptotics(const BoundaryRelation& rel, int ray_count,
                                      const std::vector<double>& radius_schedule) {
    const int dim = 2;
    struct Ray {
        Vec dir, fixed;
    };
    std::vector<Ray> rays;
    Rng setup(9001);
    for (int i = 0; i < ray_count; ++i) {
        Vec u = setup.shell_vec(dim, 1.0);
        u *= 1.0 / norm(u);
        rays.push_back({u, setup.shell_vec(dim, 1.0)});
    }
    auto evs = [&](Rng&, int ray, double r) {
        const auto& R = rays[static_cast<size_t>(ray)];
        Vec s = r * R.dir;
        return dot(rel.eval(s, R.fixed), s);
    };
    auto evd = [&](Rng&, int ray, double r) {
        const auto& R = rays[static_cast<size_t>(ray)];
        Vec v = r * R.dir;
        return dot(rel.eval(R.fixed, v), v);
    };
    return asymptotics_impl(ray_count, radius_schedule, 0, evs, evd);
}

// ---------------------------------------------------------------------------
// Coercivity (G4 / g4)
// ---------------------------------------------------------------------------

namespace {

struct CoerciveSample {
    double y;    // S:D
    double fd;   // |D|^r
    double fs;   // |S|^r'
    double radius;
};

AdmissibilityReport coercivity_from_samples(std::vector<CoerciveSample> samples, double r,
                                            double rp,
                                            const std::function<void(int, AdmissibilityReport&)>&
                                                record_witness) {
    AdmissibilityReport rep;
    rep.condition = Condition::G4;
    double rmax = 0.0;
    for (const auto& s : samples) rmax = std::max(rmax, s.radius);
    // Coefficient-split constants mirroring the power-law duality identity:
    // on the outermost shell the dissipation splits as y/r against |D|^r and
    // y/r' against |S|^r'.
    double a = kInf, b = kInf;
    int wa = -1;
    for (size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.radius != rmax) continue;
        if (s.fd > 1e-14 && s.y / (r * s.fd) < a) {
            a = s.y / (r * s.fd);
            if (s.y <= 0.0) wa = static_cast<int>(i);
        }
        if (s.fs > 1e-14 && s.y / (rp * s.fs) < b) {
            b = s.y / (rp * s.fs);
            if (s.y <= 0.0) wa = static_cast<int>(i);
        }
    }
    if (!std::isfinite(a)) a = 0.0;
    if (!std::isfinite(b)) b = 0.0;
    double c1 = std::max(0.0, std::min(a, b));
    double c2 = 0.0;
    int wshort = -1;
    for (size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        double short_ = c1 * (s.fd + s.fs) - s.y;
        if (short_ > c2) {
            c2 = short_;
            wshort = static_cast<int>(i);
        }
    }
    rep.estimated_constants["C1"] = c1;
    rep.estimated_constants["C2"] = c2;
    rep.estimated_constants["C1_rate_branch"] = a;
    rep.estimated_constants["C1_stress_branch"] = b;
    rep.passed = c1 > kSignTol;
    int w = rep.passed ? wshort : wa;
    if (w >= 0) record_witness(w, rep);
    return rep;
}

}  // namespace

AdmissibilityReport check_coercivity(const BulkRelation& rel, const Sampler& sampler) {
    sampler.validate();
    Rng rng(sampler.seed + 5);
    const auto& radii = sampler.radius_schedule;
    const double r = rel.growth_exponent(), rp = rel.dual_exponent();
    std::vector<CoerciveSample> samples;
    std::vector<std::pair<SymTensor2, SymTensor2>> pts;
    for (int i = 0; i < sampler.count; ++i) {
        double rad = radii[static_cast<size_t>(i) % radii.size()];
        SymTensor2 S(sampler.dim), D(sampler.dim);
        sample_graph_point(rel, rng, rad, S, D, sampler.dim);
        samples.push_back({inner(S, D), std::pow(frobenius_norm(D), r),
                           std::pow(frobenius_norm(S), rp), rad});
        pts.emplace_back(S, D);
    }
    return coercivity_from_samples(std::move(samples), r, rp,
                                   [&](int w, AdmissibilityReport& rep) {
                                       rep.witness_layout = "S,D";
                                       append_tensor(rep.worst_witness, pts[static_cast<size_t>(w)].first);
                                       append_tensor(rep.worst_witness, pts[static_cast<size_t>(w)].second);
                                   });
}

AdmissibilityReport check_coercivity(const BoundaryRelation& rel, const Sampler& sampler) {
    sampler.validate();
    Rng rng(sampler.seed + 5);
    const auto& radii = sampler.radius_schedule;
    const double q = rel.growth_exponent(), qp = rel.dual_exponent();
    std::vector<CoerciveSample> samples;
    std::vector<std::pair<Vec, Vec>> pts;
    for (int i = 0; i < sampler.count; ++i) {
        double rad = radii[static_cast<size_t>(i) % radii.size()];
        Vec s(sampler.dim), v(sampler.dim);
        sample_graph_point(rel, rng, rad, s, v, sampler.dim);
        samples.push_back({dot(s, v), std::pow(norm(v), q), std::pow(norm(s), qp), rad});
        pts.emplace_back(s, v);
    }
    return coercivity_from_samples(std::move(samples), q, qp,
                                   [&](int w, AdmissibilityReport& rep) {
                                       rep.witness_layout = "s,v";
                                       append_vec(rep.worst_witness, pts[static_cast<size_t>(w)].first);
                                       append_vec(rep.worst_witness, pts[static_cast<size_t>(w)].second);
                                   });
}

// ---------------------------------------------------------------------------

std::vector<AdmissibilityReport> check_bulk(const BulkRelation& rel, const Sampler& sampler) {
    std::vector<AdmissibilityReport> out;
    out.push_back(check_lipschitz(rel, sampler));
    out.push_back(check_derivative_signs(rel, sampler));
    out.push_back(check_graph_monotone(rel, sampler));
    out.push_back(check_asymptotics(rel, 32, {1.0, 10.0, 100.0, 1000.0}));
    out.push_back(check_coercivity(rel, sampler));
    return out;
}

std::vector<AdmissibilityReport> check_boundary(const BoundaryRelation& rel,
                                                const Sampler& sampler) {
    std::vector<AdmissibilityReport> out;
    out.push_back(check_lipschitz(rel, sampler));
    out.push_back(check_derivative_signs(rel, sampler));
    out.push_back(check_graph_monotone(rel, sampler));
    out.push_back(check_asymptotics(rel, 32, {1.0, 10.0, 100.0, 1000.0}));
    out.push_back(check_coercivity(rel, sampler));
    return out;
}

}  // namespace rheo
