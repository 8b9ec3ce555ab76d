#include <cmath>
#include <vector>

#include "doctest.h"
#include "rheo/regularization.hpp"
#include "rheo/rng.hpp"

using namespace rheo;

namespace {

std::vector<BulkRelation> bulk_members() {
    return {
        BulkRelation(BulkKind::navier_stokes, {{"nu", 1.0}}),
        BulkRelation(BulkKind::power_law, {{"nu0", 0.5}, {"r", 3.0}}),
        BulkRelation(BulkKind::power_law, {{"nu0", 0.5}, {"r", 1.5}}),
        BulkRelation(BulkKind::carreau, {{"nu0", 2.0}, {"nu_inf", 0.1}, {"A", 1.0}, {"n", 1.0}}),
        BulkRelation(BulkKind::bingham, {{"nu", 0.5}, {"tau_star", 1.0}}),
        BulkRelation(BulkKind::herschel_bulkley, {{"nu0", 1.0}, {"r", 1.5}, {"tau_star", 1.0}}),
        BulkRelation(BulkKind::activated_euler, {{"nu", 0.5}, {"delta_star", 1.0}}),
        BulkRelation(BulkKind::glen, {{"A", 1.0}, {"m", 2.0}}),
    };
}

std::vector<BoundaryRelation> boundary_members() {
    return {
        BoundaryRelation(BoundaryKind::navier_slip, {{"gamma", 2.0}}),
        BoundaryRelation(BoundaryKind::power_slip, {{"gamma", 1.0}, {"q", 3.0}}),
        BoundaryRelation(BoundaryKind::stick_slip, {{"sigma_star", 1.0}}),
        BoundaryRelation(BoundaryKind::activated_navier_slip, {{"gamma", 1.0}, {"beta_star", 0.5}}),
    };
}

}  // namespace

TEST_CASE("eps substitution is exact") {
    BulkRelation ns(BulkKind::navier_stokes, {{"nu", 1.0}});
    EpsBulkRelation rel(ns, 0.1);
    Rng rng(5);
    for (int k = 0; k < 100; ++k) {
        auto S = rng.normal_tensor(2);
        auto D = rng.normal_tensor(2);
        // G_eps(S,D) = (1+2e)S - (2+e)D for the Navier-Stokes relation
        auto expect = 1.2 * S - 2.1 * D;
        CHECK(frobenius_norm(rel.eval(S, D) - expect) < 1e-14);
        auto direct = ns.eval(S - 0.1 * D, D - 0.1 * S);
        CHECK(frobenius_norm(rel.eval(S, D) - direct) == 0.0);
    }
    CHECK_THROWS_AS(EpsBulkRelation(ns, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(EpsBulkRelation(ns, 1.0), std::invalid_argument);
}

TEST_CASE("eps relation keeps the origin and converges pointwise") {
    auto O = SymTensor2::zero(2);
    Rng rng(6);
    for (const auto& base : bulk_members()) {
        CAPTURE(to_string(base.kind()));
        EpsBulkRelation tiny(base, 1e-8);
        CHECK(frobenius_norm(tiny.eval(O, O)) == 0.0);
        for (int k = 0; k < 50; ++k) {
            auto S = rng.shell_tensor(2, rng.uniform(0.1, 1.0));
            auto D = rng.shell_tensor(2, rng.uniform(0.1, 1.0));
            CHECK(frobenius_norm(tiny.eval(S, D) - base.eval(S, D)) < 1e-6);
        }
    }
}

TEST_CASE("navier-stokes resolvent has the closed form (2nu+e)/(1+2nu e)") {
    BulkRelation ns(BulkKind::navier_stokes, {{"nu", 1.0}});
    EpsBulkRelation rel(ns, 0.1);
    auto D = SymTensor2::diag2(1.0, -1.0);
    auto S = rel.resolve_stress(D);
    CHECK(frobenius_norm(S - 1.75 * D) < 1e-12);

    Rng rng(7);
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        EpsBulkRelation r2(ns, eps);
        double coef = (2.0 + eps) / (1.0 + 2.0 * eps);
        for (int k = 0; k < 20; ++k) {
            auto Dk = rng.shell_tensor(2, rng.uniform(0.1, 10.0));
            CHECK(frobenius_norm(r2.resolve_stress(Dk) - coef * Dk) <
                  1e-12 * (1.0 + frobenius_norm(Dk)));
        }
    }
}

TEST_CASE("resolvent of zero is zero for every member") {
    auto O = SymTensor2::zero(2);
    for (const auto& base : bulk_members()) {
        CAPTURE(to_string(base.kind()));
        for (double eps : {1e-1, 1e-2, 1e-3})
            CHECK(frobenius_norm(EpsBulkRelation(base, eps).resolve_stress(O)) == 0.0);
    }
    Vec z(0.0, 0.0);
    for (const auto& base : boundary_members()) {
        CAPTURE(to_string(base.kind()));
        for (double eps : {1e-1, 1e-2, 1e-3})
            CHECK(norm(EpsBoundaryRelation(base, eps).resolve_slip(z)) == 0.0);
    }
}

TEST_CASE("power-law resolvent stays within 5 eps of the base stress at |D| = 1") {
    BulkRelation pl(BulkKind::power_law, {{"nu0", 0.5}, {"r", 3.0}});
    double eps = 1e-3;
    EpsBulkRelation rel(pl, eps);
    auto D = SymTensor2::offdiag2(1.0 / std::sqrt(2.0));  // |D| = 1, S*(D) = D
    auto S = rel.resolve_stress(D);
    CHECK(frobenius_norm(S - D) <= 5.0 * eps);
    // the scalar oracle agrees
    double smag = scalar_oracle_resolve(rel, 1.0);
    CHECK(frobenius_norm(S) == doctest::Approx(smag).epsilon(1e-9));
}

TEST_CASE("navier slip resolvent closed form (gamma+e)/(1+gamma e)") {
    BoundaryRelation nsl(BoundaryKind::navier_slip, {{"gamma", 2.0}});
    EpsBoundaryRelation rel(nsl, 0.1);
    Vec v(1.0, 0.0);
    Vec s = rel.resolve_slip(v);
    CHECK(norm(s - Vec(1.75, 0.0)) < 1e-12);
}

TEST_CASE("stick-slip resolvent matches the scalar oracle") {
    BoundaryRelation ss(BoundaryKind::stick_slip, {{"sigma_star", 1.0}});
    EpsBoundaryRelation rel(ss, 0.01);
    Vec v(2.0, 0.0);
    Vec s = rel.resolve_slip(v);
    double smag = norm(s);
    CHECK(smag > 1.0);                      // above the activation threshold
    CHECK(smag < 1.0 + 2.0 * (1.0 + 0.01));  // below sigma + |v|(1+eps)
    CHECK(smag == doctest::Approx(2.99009900990099).epsilon(1e-10));
    CHECK(smag == doctest::Approx(scalar_oracle_resolve(rel, 2.0)).epsilon(1e-8));
}

TEST_CASE("scalar oracle basics") {
    BulkRelation ns(BulkKind::navier_stokes, {{"nu", 1.0}});
    EpsBulkRelation rel(ns, 0.1);
    CHECK(scalar_oracle_resolve(rel, std::sqrt(2.0)) ==
          doctest::Approx(1.75 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(scalar_oracle_resolve(rel, 0.0) == 0.0);

    BulkRelation bing(BulkKind::bingham, {{"nu", 0.5}, {"tau_star", 1.0}});
    CHECK(scalar_oracle_resolve(EpsBulkRelation(bing, 0.1), 0.0) == 0.0);
}

TEST_CASE("tensor resolvent equals the scalar oracle on isotropic members") {
    Rng rng(8);
    for (const auto& base : bulk_members()) {
        CAPTURE(to_string(base.kind()));
        for (double eps : {1e-1, 1e-2}) {
            EpsBulkRelation rel(base, eps);
            for (double mag : {0.1, 1.0, 10.0}) {
                auto U = rng.shell_tensor(2, 1.0);
                U *= 1.0 / frobenius_norm(U);
                auto S = rel.resolve_stress(mag * U);
                double expect = scalar_oracle_resolve(rel, mag);
                CHECK(frobenius_norm(S) == doctest::Approx(expect).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("resolvent uniqueness under random restarts") {
    Rng rng(9);
    for (const auto& base : bulk_members()) {
        CAPTURE(to_string(base.kind()));
        EpsBulkRelation rel(base, 1e-2);
        auto D = rng.shell_tensor(2, 1.0);
        auto Sref = rel.resolve_stress(D);
        for (int k = 0; k < 16; ++k) {
            auto guess = rng.shell_tensor(2, rng.uniform(0.1, 5.0));
            auto S = rel.resolve_stress(D, guess);
            CHECK(frobenius_norm(S - Sref) < 1e-8 * (1.0 + frobenius_norm(Sref)));
        }
    }
}

TEST_CASE("resolvent monotonicity over random pairs") {
    Rng rng(10);
    for (const auto& base : bulk_members()) {
        CAPTURE(to_string(base.kind()));
        for (double eps : {1e-1, 1e-2, 1e-3}) {
            EpsBulkRelation rel(base, eps);
            for (int k = 0; k < 100; ++k) {
                auto D1 = rng.shell_tensor(2, std::pow(10.0, rng.uniform(-1.0, 1.0)));
                auto D2 = rng.shell_tensor(2, std::pow(10.0, rng.uniform(-1.0, 1.0)));
                auto S1 = rel.resolve_stress(D1);
                auto S2 = rel.resolve_stress(D2);
                CHECK(inner(S1 - S2, D1 - D2) >= -1e-12 * (1.0 + frobenius_norm(S1 - S2) *
                                                                     frobenius_norm(D1 - D2)));
            }
        }
    }
}

TEST_CASE("residual bound holds for every converged solve") {
    Rng rng(11);
    for (const auto& base : bulk_members()) {
        EpsBulkRelation rel(base, 1e-2);
        for (int k = 0; k < 50; ++k) {
            auto D = rng.shell_tensor(2, std::pow(10.0, rng.uniform(-1.0, 1.0)));
            auto S = rel.resolve_stress(D);
            double res = frobenius_norm(rel.eval(S, D));
            CHECK(res <= 1e-9 * (1.0 + frobenius_norm(S) + frobenius_norm(D)));
        }
    }
}

TEST_CASE("eps-consistency: resolvent approaches the explicit stress") {
    Rng rng(12);
    for (const auto& base : bulk_members()) {
        if (!base.has_explicit_stress()) continue;
        CAPTURE(to_string(base.kind()));
        std::vector<SymTensor2> points;
        for (int k = 0; k < 100; ++k) points.push_back(rng.shell_tensor(2, rng.uniform(0.2, 1.0)));
        double prev = 1e300;
        for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
            EpsBulkRelation rel(base, eps);
            double worst = 0.0;
            for (const auto& D : points) {
                auto S = rel.resolve_stress(D);
                worst = std::max(worst, frobenius_norm(S - *base.explicit_stress(D)));
            }
            CHECK(worst < prev + 1e-14);
            prev = worst;
        }
        CHECK(prev < 1e-3);  // the last gap is small
    }
}

TEST_CASE("continuation realizes a selection") {
    BulkRelation ns(BulkKind::navier_stokes, {{"nu", 1.0}});
    auto D = SymTensor2::diag2(0.4, -0.4);
    auto res = continuation_resolve(ns, D, {1e-1, 1e-2, 1e-3});
    CHECK(frobenius_norm(res.stress - 2.0 * D) <= 3e-3 * frobenius_norm(D));
    CHECK(res.cauchy_increment < 0.1);

    BulkRelation bing(BulkKind::bingham, {{"nu", 0.5}, {"tau_star", 1.0}});
    auto zero = continuation_resolve(bing, SymTensor2::zero(2), {1e-1, 1e-2, 1e-3});
    CHECK(frobenius_norm(zero.stress) == 0.0);

    auto Db = SymTensor2::diag2(1.0, -1.0);
    auto flowing = continuation_resolve(bing, Db, default_eps_schedule());
    CHECK(frobenius_norm(bing.eval(flowing.stress, Db)) < 1e-6);
    CHECK(frobenius_norm(flowing.stress) > 1.0);  // beyond the activation threshold

    // schedule validation
    CHECK_THROWS_AS(continuation_resolve(ns, D, {1e-2, 1e-1}), std::invalid_argument);
    CHECK_THROWS_AS(continuation_resolve(ns, D, {1e-1, 1e-9}), std::invalid_argument);
    CHECK_THROWS_AS(continuation_resolve(ns, D, {}), std::invalid_argument);
}

TEST_CASE("resolvent constants for the linear relation are exact") {
    BulkRelation ns(BulkKind::navier_stokes, {{"nu", 1.0}});
    ResolventSampler sampler;
    sampler.seed = 3;
    sampler.pair_count = 200;
    auto c = estimate_resolvent_constants(EpsBulkRelation(ns, 0.1), sampler);
    CHECK(c.lipschitz == doctest::Approx(1.75).epsilon(1e-10));
    CHECK(c.monotone == doctest::Approx(1.75).epsilon(1e-10));
    CHECK(c.coercivity_c1 > 0.0);
}

TEST_CASE("monotone constant stays nonnegative across the catalog") {
    ResolventSampler sampler;
    sampler.seed = 4;
    sampler.pair_count = 128;
    for (const auto& base : bulk_members()) {
        CAPTURE(to_string(base.kind()));
        for (double eps : {1e-1, 1e-2}) {
            auto c = estimate_resolvent_constants(EpsBulkRelation(base, eps), sampler);
            CHECK(c.monotone >= -1e-12);
        }
    }
}

TEST_CASE("coercivity constant is eps-stable for the power-law") {
    BulkRelation pl(BulkKind::power_law, {{"nu0", 0.5}, {"r", 3.0}});
    ResolventSampler sampler;
    sampler.seed = 5;
    sampler.pair_count = 256;
    std::vector<double> c1s;
    for (double eps : {1e-1, 1e-2, 1e-3})
        c1s.push_back(estimate_resolvent_constants(EpsBulkRelation(pl, eps), sampler).coercivity_c1);
    for (double c : c1s) {
        CHECK(c > 0.0);
        CHECK(c <= 2.0 * c1s.back() + 1e-12);
        CHECK(c >= 0.5 * c1s.back() - 1e-12);
    }
}

TEST_CASE("boundary resolvent mirrors the bulk properties") {
    Rng rng(13);
    for (const auto& base : boundary_members()) {
        CAPTURE(to_string(base.kind()));
        for (double eps : {1e-1, 1e-2}) {
            EpsBoundaryRelation rel(base, eps);
            // oracle equivalence and monotonicity
            for (int k = 0; k < 60; ++k) {
                Vec v1 = rng.shell_vec(2, std::pow(10.0, rng.uniform(-1.0, 1.0)));
                Vec v2 = rng.shell_vec(2, std::pow(10.0, rng.uniform(-1.0, 1.0)));
                Vec s1 = rel.resolve_slip(v1);
                Vec s2 = rel.resolve_slip(v2);
                CHECK(dot(s1 - s2, v1 - v2) >= -1e-12 * (1.0 + norm(s1 - s2) * norm(v1 - v2)));
                CHECK(norm(s1) == doctest::Approx(scalar_oracle_resolve(rel, norm(v1))).epsilon(1e-8));
                double res = norm(rel.eval(s1, v1));
                CHECK(res <= 1e-9 * (1.0 + norm(s1) + norm(v1)));
            }
            // restart uniqueness
            Vec v = rng.shell_vec(2, 1.0);
            Vec sref = rel.resolve_slip(v);
            for (int k = 0; k < 16; ++k) {
                Vec s = rel.resolve_slip(v, rng.shell_vec(2, rng.uniform(0.1, 5.0)));
                CHECK(norm(s - sref) < 1e-8 * (1.0 + norm(sref)));
            }
        }
    }
}
