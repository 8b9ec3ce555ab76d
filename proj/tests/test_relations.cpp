#include <cmath>
#include <vector>

#include "doctest.h"
#include "rheo/relations.hpp"
#include "rheo/rng.hpp"

using namespace rheo;

namespace {

std::vector<BulkRelation> bulk_catalog() {
    return {
        BulkRelation(BulkKind::navier_stokes, {{"nu", 1.0}}),
        BulkRelation(BulkKind::power_law, {{"nu0", 0.5}, {"r", 3.0}}),
        BulkRelation(BulkKind::power_law, {{"nu0", 0.5}, {"r", 1.5}}),
        BulkRelation(BulkKind::carreau, {{"nu0", 2.0}, {"nu_inf", 0.1}, {"A", 1.0}, {"n", 1.0}}),
        BulkRelation(BulkKind::carreau_yasuda,
                     {{"nu0", 2.0}, {"nu_inf", 0.1}, {"A", 1.0}, {"a", 2.0}, {"n", 1.2}}),
        // nu0/nu_inf kept below the S-shaped regime so the flow curve stays monotone
        BulkRelation(BulkKind::cross, {{"nu0", 2.0}, {"nu_inf", 0.5}, {"A", 1.0}, {"n", 2.0}}),
        BulkRelation(BulkKind::eyring, {{"nu0", 2.0}, {"nu_inf", 0.5}, {"A", 1.0}}),
        BulkRelation(BulkKind::sisko, {{"nu_inf", 0.5}, {"A", 1.0}, {"n", 2.0}}),
        BulkRelation(BulkKind::ellis, {{"nu0", 1.0}, {"A", 1.0}, {"n", 2.0}}),
        BulkRelation(BulkKind::seely, {{"nu0", 2.0}, {"nu_inf", 0.5}, {"tau0", 1.0}}),
        BulkRelation(BulkKind::glen, {{"A", 1.0}, {"m", 2.0}}),
        BulkRelation(BulkKind::blatter, {{"A", 1.0}, {"n", 2.0}, {"tau0", 0.5}}),
        BulkRelation(BulkKind::bingham, {{"nu", 0.5}, {"tau_star", 1.0}}),
        BulkRelation(BulkKind::herschel_bulkley, {{"nu0", 1.0}, {"r", 1.5}, {"tau_star", 1.0}}),
        BulkRelation(BulkKind::activated_euler, {{"nu", 0.5}, {"delta_star", 1.0}}),
    };
}

std::vector<BoundaryRelation> boundary_catalog() {
    return {
        BoundaryRelation(BoundaryKind::navier_slip, {{"gamma", 1.0}}),
        BoundaryRelation(BoundaryKind::power_slip, {{"gamma", 1.0}, {"q", 3.0}}),
        BoundaryRelation(BoundaryKind::power_slip, {{"gamma", 1.0}, {"q", 1.5}}),
        BoundaryRelation(BoundaryKind::regularized_power_slip, {{"gamma", 1.0}, {"q", 3.0}}),
        BoundaryRelation(BoundaryKind::stick_slip, {{"sigma_star", 1.0}}),
        BoundaryRelation(BoundaryKind::activated_navier_slip, {{"gamma", 1.0}, {"beta_star", 0.5}}),
    };
}

}  // namespace

TEST_CASE("navier-stokes residual identity") {
    BulkRelation ns(BulkKind::navier_stokes, {{"nu", 1.0}});
    auto S = SymTensor2::diag2(2.0, -2.0);
    auto D = SymTensor2::diag2(1.0, -1.0);
    CHECK(frobenius_norm(ns.eval(S, D)) == doctest::Approx(0.0).epsilon(1e-15));
    // wrong stress leaves a residual
    CHECK(frobenius_norm(ns.eval(S, S)) > 1.0);
}

TEST_CASE("origin is a graph point of every catalog member") {
    auto O = SymTensor2::zero(2);
    for (const auto& rel : bulk_catalog()) {
        CAPTURE(to_string(rel.kind()));
        CHECK(frobenius_norm(rel.eval(O, O)) == 0.0);
        CHECK(rel.scalar_residual(0.0, 0.0) == 0.0);
    }
    Vec z(0.0, 0.0);
    for (const auto& rel : boundary_catalog()) {
        CAPTURE(to_string(rel.kind()));
        CHECK(norm(rel.eval(z, z)) == 0.0);
    }
}

TEST_CASE("bingham residual at the hand-computed flowing point") {
    // D = ((|S|-tau)+ / (2 nu |S|)) S at S = diag(2,-2), nu = 1/2, tau = 1:
    // |S| = 2 sqrt(2), factor (2 sqrt(2) - 1) / (2 sqrt(2))
    BulkRelation bingham(BulkKind::bingham, {{"nu", 0.5}, {"tau_star", 1.0}});
    auto S = SymTensor2::diag2(2.0, -2.0);
    auto D = SymTensor2::diag2(1.2929, -1.2929);
    CHECK(frobenius_norm(bingham.eval(S, D)) < 1e-3);
    double fac = (2.0 * std::sqrt(2.0) - 1.0) / (2.0 * std::sqrt(2.0));
    auto Dexact = fac * S;
    CHECK(frobenius_norm(bingham.eval(S, Dexact)) < 1e-14);
}

TEST_CASE("non-finite inputs are rejected") {
    BulkRelation ns(BulkKind::navier_stokes, {{"nu", 1.0}});
    auto bad = SymTensor2::diag2(std::nan(""), 0.0);
    CHECK_THROWS_AS(ns.eval(bad, SymTensor2::zero(2)), std::invalid_argument);
    BoundaryRelation nsl(BoundaryKind::navier_slip, {{"gamma", 1.0}});
    CHECK_THROWS_AS(nsl.eval(Vec(std::nan(""), 0.0), Vec(0.0, 0.0)), std::invalid_argument);
}

TEST_CASE("boundary relation examples") {
    BoundaryRelation nsl(BoundaryKind::navier_slip, {{"gamma", 1.0}});
    CHECK(norm(nsl.eval(Vec(1.0, 0.0), Vec(1.0, 0.0))) == 0.0);

    // stick-slip: v = (|s|-sigma)+ s/|s|; at s=(2,0), sigma=1 the slip is (1,0)
    BoundaryRelation ss(BoundaryKind::stick_slip, {{"sigma_star", 1.0}});
    CHECK(norm(ss.eval(Vec(2.0, 0.0), Vec(1.0, 0.0))) == doctest::Approx(0.0).epsilon(1e-15));
    // inside the stick region any |s| <= sigma pairs with v = 0
    CHECK(norm(ss.eval(Vec(0.5, 0.2), Vec(0.0, 0.0))) == 0.0);
}

TEST_CASE("explicit stress examples") {
    BulkRelation pl(BulkKind::power_law, {{"nu0", 0.5}, {"r", 3.0}});
    auto D = SymTensor2::offdiag2(1.0 / std::sqrt(2.0));  // |D| = 1
    auto S = pl.explicit_stress(D);
    REQUIRE(S.has_value());
    CHECK(frobenius_norm(*S - D) < 1e-14);

    BulkRelation ns(BulkKind::navier_stokes, {{"nu", 1.0}});
    auto D2 = SymTensor2::diag2(0.3, -0.1);
    CHECK(frobenius_norm(*ns.explicit_stress(D2) - 2.0 * D2) < 1e-15);

    // below activation the stress vanishes
    BulkRelation ae(BulkKind::activated_euler, {{"nu", 0.5}, {"delta_star", 1.0}});
    auto D3 = SymTensor2::diag2(0.5, -0.5);  // |D| = sqrt(0.5) < 1
    CHECK(frobenius_norm(*ae.explicit_stress(D3)) == 0.0);

    CHECK_FALSE(BulkRelation(BulkKind::ellis, {{"nu0", 1.0}, {"A", 1.0}, {"n", 2.0}})
                    .explicit_stress(D2)
                    .has_value());
    CHECK_FALSE(BulkRelation(BulkKind::bingham, {{"nu", 0.5}, {"tau_star", 1.0}})
                    .explicit_stress(D2)
                    .has_value());
}

TEST_CASE("explicit rate examples") {
    BulkRelation pl2(BulkKind::power_law, {{"nu0", 0.5}, {"r", 2.0}});
    auto S = SymTensor2::diag2(0.7, -0.2);
    CHECK(frobenius_norm(*pl2.explicit_rate(S) - S) < 1e-15);

    BulkRelation bingham(BulkKind::bingham, {{"nu", 0.5}, {"tau_star", 1.0}});
    auto Ssmall = SymTensor2::diag2(0.5, -0.5);  // |S| = sqrt(0.5) <= 1
    CHECK(frobenius_norm(*bingham.explicit_rate(Ssmall)) == 0.0);

    BulkRelation glen(BulkKind::glen, {{"A", 1.0}, {"m", 2.0}});
    auto Sg = SymTensor2::diag2(1.0, -1.0);
    auto Dg = glen.explicit_rate(Sg);
    REQUIRE(Dg.has_value());
    CHECK(frobenius_norm(*Dg - std::sqrt(2.0) * Sg) < 1e-14);

    CHECK_FALSE(BulkRelation(BulkKind::carreau,
                             {{"nu0", 2.0}, {"nu_inf", 0.1}, {"A", 1.0}, {"n", 1.0}})
                    .explicit_rate(S)
                    .has_value());
}

TEST_CASE("round-trip closure on random graph points") {
    Rng rng(42);
    for (const auto& rel : bulk_catalog()) {
        CAPTURE(to_string(rel.kind()));
        for (int k = 0; k < 1000; ++k) {
            double radius = std::pow(10.0, rng.uniform(-1.0, 1.0));
            SymTensor2 S(2), D(2);
            if (rel.has_explicit_stress()) {
                D = rng.shell_tensor(2, radius);
                S = *rel.explicit_stress(D);
            } else if (rel.has_explicit_rate()) {
                S = rng.shell_tensor(2, radius);
                D = *rel.explicit_rate(S);
            } else {
                auto U = rng.shell_tensor(2, 1.0);
                U *= 1.0 / frobenius_norm(U);
                double d = radius;
                double s = rel.scalar_stress_from_rate(d);
                S = s * U;
                D = d * U;
            }
            double res = frobenius_norm(rel.eval(S, D));
            CHECK(res <= 1e-12 * (1.0 + frobenius_norm(S) + frobenius_norm(D)));
        }
    }
}

TEST_CASE("graph points from rates are collinear with the rate") {
    Rng rng(43);
    for (const auto& rel : bulk_catalog()) {
        if (!rel.has_explicit_stress()) continue;
        CAPTURE(to_string(rel.kind()));
        for (int k = 0; k < 100; ++k) {
            auto D = rng.shell_tensor(2, std::pow(10.0, rng.uniform(-0.5, 0.5)) * 2.0);
            auto S = *rel.explicit_stress(D);
            double ns = frobenius_norm(S), nd = frobenius_norm(D);
            if (ns < 1e-12) continue;  // inert branch of activated members
            double cosangle = inner(S, D) / (ns * nd);
            CHECK(cosangle == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("power-law duality: explicit maps are mutual inverses") {
    Rng rng(44);
    for (double r : {1.5, 2.0, 3.0}) {
        BulkRelation pl(BulkKind::power_law, {{"nu0", 0.7}, {"r", r}});
        for (int k = 0; k < 200; ++k) {
            auto D = rng.shell_tensor(2, std::pow(10.0, rng.uniform(-1.0, 1.0)));
            auto S = *pl.explicit_stress(D);
            auto Dback = *pl.explicit_rate(S);
            CHECK(frobenius_norm(Dback - D) <= 1e-10 * frobenius_norm(D));
        }
    }
}

TEST_CASE("dissipation split identity") {
    BulkRelation pl2(BulkKind::power_law, {{"nu0", 0.5}, {"r", 2.0}});
    auto D = SymTensor2::diag2(1.0, -1.0);
    auto split = dissipation_split(pl2, D, D);  // S = D at r=2, nu0=1/2
    CHECK(split.total == doctest::Approx(2.0));
    CHECK(split.rate_part == doctest::Approx(1.0));
    CHECK(split.stress_part == doctest::Approx(1.0));

    auto zero = dissipation_split(pl2, SymTensor2::zero(2), SymTensor2::zero(2));
    CHECK(zero.total == 0.0);
    CHECK(zero.rate_part == 0.0);
    CHECK(zero.stress_part == 0.0);

    BulkRelation pl3(BulkKind::power_law, {{"nu0", 0.5}, {"r", 3.0}});
    auto D3 = SymTensor2::offdiag2(1.0 / std::sqrt(2.0));  // |D| = 1
    auto s3 = dissipation_split(pl3, *pl3.explicit_stress(D3), D3);
    CHECK(s3.total == doctest::Approx(1.0));
    CHECK(s3.rate_part == doctest::Approx(1.0 / 3.0));
    CHECK(s3.stress_part == doctest::Approx(2.0 / 3.0));

    // non-graph points are rejected
    CHECK_THROWS_AS(dissipation_split(pl3, 3.0 * D3, D3), std::invalid_argument);
}

TEST_CASE("dissipation split sums exactly on random graph points") {
    Rng rng(45);
    for (double r : {1.5, 2.0, 3.0}) {
        BulkRelation pl(BulkKind::power_law, {{"nu0", 0.8}, {"r", r}});
        for (int k = 0; k < 200; ++k) {
            auto D = rng.shell_tensor(2, std::pow(10.0, rng.uniform(-1.0, 1.0)));
            auto S = *pl.explicit_stress(D);
            auto sp = dissipation_split(pl, S, D);
            CHECK(std::fabs(sp.total - sp.rate_part - sp.stress_part) <= 1e-12 * sp.total);
        }
    }
}

TEST_CASE("scalar graph maps invert each other") {
    Rng rng(46);
    for (const auto& rel : bulk_catalog()) {
        CAPTURE(to_string(rel.kind()));
        for (int k = 0; k < 40; ++k) {
            double d = std::pow(10.0, rng.uniform(-1.0, 1.0));
            double s = rel.scalar_stress_from_rate(d);
            // activated Euler is flat below the activation rate
            if (rel.kind() == BulkKind::activated_euler && s == 0.0) continue;
            double dback = rel.scalar_rate_from_stress(s);
            // bingham-type members flatten |d| below threshold onto s = tau
            if ((rel.kind() == BulkKind::bingham || rel.kind() == BulkKind::herschel_bulkley) &&
                dback == 0.0)
                continue;
            CHECK(dback == doctest::Approx(d).epsilon(1e-8));
        }
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(BulkRelation(BulkKind::navier_stokes, {{"nu", -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(BulkRelation(BulkKind::power_law, {{"nu0", 1.0}, {"r", 1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(BulkRelation(BulkKind::bingham, {{"nu", 0.5}, {"tau_star", -1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(BulkRelation(BulkKind::navier_stokes, {{"nu", 1.0}, {"bogus", 2.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(BoundaryRelation(BoundaryKind::navier_slip, {{"gamma", 0.0}}),
                    std::invalid_argument);
}

TEST_CASE("growth exponents follow the coercivity class") {
    CHECK(BulkRelation(BulkKind::bingham, {{"nu", 0.5}, {"tau_star", 1.0}}).growth_exponent() ==
          2.0);
    CHECK(BulkRelation(BulkKind::power_law, {{"nu0", 1.0}, {"r", 3.0}}).growth_exponent() == 3.0);
    CHECK(BulkRelation(BulkKind::glen, {{"A", 1.0}, {"m", 2.0}}).growth_exponent() ==
          doctest::Approx(1.5));
    CHECK(BoundaryRelation(BoundaryKind::stick_slip, {{"sigma_star", 1.0}}).growth_exponent() ==
          2.0);
}

TEST_CASE("key-value serialization round trip") {
    BulkRelation car(BulkKind::carreau, {{"nu0", 2.0}, {"nu_inf", 0.1}, {"A", 1.5}, {"n", 1.2}});
    auto kv = car.to_kv();
    CHECK(kv.at("kind") == "carreau");
    auto back = BulkRelation::from_kv(kv);
    CHECK(back.kind() == BulkKind::carreau);
    for (const auto& [k, v] : car.params()) CHECK(back.param(k) == v);

    BoundaryRelation ps(BoundaryKind::power_slip, {{"gamma", 2.0}, {"q", 3.0}});
    auto kv2 = ps.to_kv();
    auto back2 = BoundaryRelation::from_kv(kv2);
    CHECK(back2.param("q") == 3.0);

    CHECK_THROWS(BulkRelation::from_kv({{"kind", "no_such_model"}}));
    CHECK_THROWS(BulkRelation::from_kv({{"nu", "1.0"}}));  // missing kind
}
