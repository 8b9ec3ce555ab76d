#include <cmath>
#include <cstring>

#include "doctest.h"
#include "rheo/admissibility.hpp"
#include "rheo/rng.hpp"

using namespace rheo;

namespace {

Sampler default_sampler(uint64_t seed = 1) {
    Sampler s;
    s.seed = seed;
    s.count = 256;
    return s;
}

// Table row with r < 1: the scalar slope of (1+x)^{r-2} x turns negative,
// the standard non-monotone fixture.
BulkRelation nonmonotone_fixture() {
    return BulkRelation(BulkKind::shifted_power, {{"nu0", 0.5}, {"r", 0.5}});
}

BulkRelation navier_stokes() { return BulkRelation(BulkKind::navier_stokes, {{"nu", 1.0}}); }

}  // namespace

TEST_CASE("lipschitz estimate for the linear relation") {
    auto rep = check_lipschitz(navier_stokes(), default_sampler());
    CHECK(rep.passed);
    // global constant is sqrt(5) ~ 2.236; sampled max lands in [2, 2.3]
    CHECK(rep.estimated_constants.at("L") >= 2.0);
    CHECK(rep.estimated_constants.at("L") <= 2.3);
    CHECK(rep.estimated_constants.at("growth_ratio") < 1.5);
}

TEST_CASE("lipschitz flags super-linear slope growth for the power law") {
    BulkRelation pl(BulkKind::power_law, {{"nu0", 0.5}, {"r", 3.0}});
    auto rep = check_lipschitz(pl, default_sampler());
    CHECK(rep.passed);  // finite on bounded shells
    bool flagged = false;
    for (const auto& f : rep.flags) flagged = flagged || f == "slope_growth";
    CHECK(flagged);
}

TEST_CASE("lipschitz of the zero relation is zero") {
    CustomBulk impl;
    impl.residual = [](const SymTensor2& S, const SymTensor2&) { return SymTensor2::zero(S.dim()); };
    impl.scalar_residual = [](double, double) { return 0.0; };
    auto rel = BulkRelation::custom(std::move(impl));
    auto rep = check_lipschitz(rel, default_sampler());
    CHECK(rep.passed);
    CHECK(rep.estimated_constants.at("L") == 0.0);
}

TEST_CASE("derivative signs for navier-stokes are the exact quotients") {
    auto rep = check_derivative_signs(navier_stokes(), default_sampler());
    CHECK(rep.passed);
    CHECK(rep.estimated_constants.at("dGdS_min_quotient") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.estimated_constants.at("dGdD_max_quotient") == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(rep.estimated_constants.at("strict_min_quotient") == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(rep.estimated_constants.at("product_max_quotient") < 0.0);
}

TEST_CASE("derivative signs pass for the power law r=3") {
    BulkRelation pl(BulkKind::power_law, {{"nu0", 0.5}, {"r", 3.0}});
    auto rep = check_derivative_signs(pl, default_sampler());
    CHECK(rep.passed);
    CHECK(rep.estimated_constants.at("dGdD_max_quotient") <= kSignTol);
}

TEST_CASE("derivative signs fail with a reproducible witness on the fixture") {
    auto rel = nonmonotone_fixture();
    auto rep = check_derivative_signs(rel, default_sampler());
    CHECK_FALSE(rep.passed);
    REQUIRE(rep.witness_layout == "S,D");
    REQUIRE(rep.worst_witness.size() == 6);
    // the witness reproduces a wrong-signed slope: dG/dD must have a positive
    // Rayleigh quotient at the recorded point
    SymTensor2 S(2), D(2);
    for (int k = 0; k < 3; ++k) {
        S.comp(k) = rep.worst_witness[static_cast<size_t>(k)];
        D.comp(k) = rep.worst_witness[static_cast<size_t>(k + 3)];
    }
    double h = 1e-6 * (1.0 + frobenius_norm(S) + frobenius_norm(D));
    double worst = 0.0;
    Rng rng(99);
    for (int k = 0; k < 512; ++k) {
        auto X = rng.normal_tensor(2);
        X *= 1.0 / frobenius_norm(X);
        double q = inner(rel.eval(S, D + h * X) - rel.eval(S, D - h * X), X) / (2.0 * h);
        worst = std::max(worst, q);
    }
    CHECK(worst > kSignTol);
}

TEST_CASE("graph monotonicity holds for bingham across both branches") {
    BulkRelation bing(BulkKind::bingham, {{"nu", 0.5}, {"tau_star", 1.0}});
    Sampler s = default_sampler();
    s.count = 2048;
    auto rep = check_graph_monotone(bing, s);
    CHECK(rep.passed);
    CHECK(rep.estimated_constants.at("min_normalized_product") >= -kSignTol);
}

TEST_CASE("graph monotonicity of an identical pair is zero") {
    // degenerate pair: product is exactly zero, not a violation
    BulkRelation ns = navier_stokes();
    auto D = SymTensor2::diag2(1.0, -1.0);
    auto S = *ns.explicit_stress(D);
    CHECK(inner(S - S, D - D) == 0.0);
}

TEST_CASE("graph monotonicity fails on the non-monotone fixture") {
    auto rep = check_graph_monotone(nonmonotone_fixture(), default_sampler());
    CHECK_FALSE(rep.passed);
    // witness reproduces the violation
    REQUIRE(rep.worst_witness.size() == 12);
    SymTensor2 S1(2), D1(2), S2(2), D2(2);
    for (int k = 0; k < 3; ++k) {
        S1.comp(k) = rep.worst_witness[static_cast<size_t>(k)];
        D1.comp(k) = rep.worst_witness[static_cast<size_t>(k + 3)];
        S2.comp(k) = rep.worst_witness[static_cast<size_t>(k + 6)];
        D2.comp(k) = rep.worst_witness[static_cast<size_t>(k + 9)];
    }
    CHECK(inner(S1 - S2, D1 - D2) < -kSignTol);
}

TEST_CASE("asymptotics: quadratic dominance, power-law branch, zero relation") {
    std::vector<double> radii = {1.0, 10.0, 100.0, 1000.0};
    CHECK(check_asymptotics(navier_stokes(), 32, radii).passed);

    BulkRelation pl(BulkKind::power_law, {{"nu0", 0.5}, {"r", 3.0}});
    CHECK(check_asymptotics(pl, 32, radii).passed);

    CustomBulk impl;
    impl.residual = [](const SymTensor2& S, const SymTensor2&) { return SymTensor2::zero(S.dim()); };
    impl.scalar_residual = [](double, double) { return 0.0; };
    auto zero_rel = BulkRelation::custom(std::move(impl));
    auto rep = check_asymptotics(zero_rel, 8, radii);
    CHECK_FALSE(rep.passed);

    CHECK_THROWS_AS(check_asymptotics(navier_stokes(), 8, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("coercivity of navier-stokes recovers the dissipation-split constant") {
    auto rep = check_coercivity(navier_stokes(), default_sampler());
    CHECK(rep.passed);
    double c1 = rep.estimated_constants.at("C1");
    // analytic constant from the exact split: min(nu, 1/(4 nu)) = 0.25
    CHECK(c1 >= 0.25 * 0.95);
    CHECK(c1 <= 0.25 + 1e-9);
    CHECK(rep.estimated_constants.at("C2") <= 1e-9);
}

TEST_CASE("coercivity of the power law matches the analytic constants within 5%") {
    for (double nu0 : {0.5, 1.0, 2.0}) {
        for (double r : {1.5, 2.0, 3.0}) {
            BulkRelation pl(BulkKind::power_law, {{"nu0", nu0}, {"r", r}});
            auto rep = check_coercivity(pl, default_sampler());
            CHECK(rep.passed);
            double expect = std::min(2.0 * nu0 / r,
                                     (r - 1.0) / (r * std::pow(2.0 * nu0, 1.0 / (r - 1.0))));
            CHECK(rep.estimated_constants.at("C1") ==
                  doctest::Approx(expect).epsilon(0.05));
            CHECK(rep.estimated_constants.at("C1") <= expect * 1.05);
        }
    }
}

TEST_CASE("coercivity scaling in nu0 is coherent") {
    // C1(nu0) for r=3 follows min(2 nu0/3, 2/(3 sqrt(2 nu0))); ratios within 10%
    std::map<double, double> est;
    for (double nu0 : {0.5, 1.0, 2.0}) {
        BulkRelation pl(BulkKind::power_law, {{"nu0", nu0}, {"r", 3.0}});
        est[nu0] = check_coercivity(pl, default_sampler()).estimated_constants.at("C1");
    }
    for (auto [nu0, c] : est) {
        double expect = std::min(2.0 * nu0 / 3.0, 2.0 / (3.0 * std::sqrt(2.0 * nu0)));
        CHECK(c / expect == doctest::Approx(1.0).epsilon(0.10));
    }
}

TEST_CASE("coercivity of bingham passes with a positive offset") {
    BulkRelation bing(BulkKind::bingham, {{"nu", 0.5}, {"tau_star", 1.0}});
    Sampler s = default_sampler();
    s.count = 1024;
    auto rep = check_coercivity(bing, s);
    CHECK(rep.passed);
    CHECK(rep.estimated_constants.at("C1") > 0.0);
    CHECK(rep.estimated_constants.at("C2") > 0.0);  // threshold offset
}

TEST_CASE("boundary checks: navier slip passes everything with c1 = 0.25") {
    BoundaryRelation nsl(BoundaryKind::navier_slip, {{"gamma", 2.0}});
    auto reps = check_boundary(nsl, default_sampler());
    REQUIRE(reps.size() == 5);
    for (const auto& r : reps) {
        CAPTURE(to_string(r.condition));
        CHECK(r.passed);
    }
    // s.v = (gamma/2)|v|^2 + (1/(2 gamma))|s|^2 gives c1 = min(1, 0.25)
    CHECK(reps[4].estimated_constants.at("C1") == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("boundary checks: stick-slip passes with offset, zero relation fails g4") {
    BoundaryRelation ss(BoundaryKind::stick_slip, {{"sigma_star", 1.0}});
    auto reps = check_boundary(ss, default_sampler());
    for (const auto& r : reps) {
        CAPTURE(to_string(r.condition));
        CHECK(r.passed);
    }
    CHECK(reps[4].estimated_constants.at("C2") > 0.0);

    CustomBoundary zb;
    zb.residual = [](const Vec& s, const Vec&) { return Vec::zero(s.dim()); };
    zb.scalar_residual = [](double, double) { return 0.0; };
    auto zrel = BoundaryRelation::custom(std::move(zb));
    auto zrep = check_coercivity(zrel, default_sampler());
    CHECK_FALSE(zrep.passed);
}

TEST_CASE("reports are deterministic for a fixed seed") {
    BulkRelation bing(BulkKind::bingham, {{"nu", 0.5}, {"tau_star", 1.0}});
    Sampler s = default_sampler(1234);
    auto a = check_bulk(bing, s);
    auto b = check_bulk(bing, s);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].passed == b[i].passed);
        REQUIRE(a[i].estimated_constants.size() == b[i].estimated_constants.size());
        for (const auto& [k, v] : a[i].estimated_constants) {
            // bitwise equality
            CHECK(std::memcmp(&v, &b[i].estimated_constants.at(k), sizeof(double)) == 0);
        }
        CHECK(a[i].worst_witness == b[i].worst_witness);
    }
}

TEST_CASE("threaded evaluation reduces identically to serial") {
    BulkRelation pl(BulkKind::power_law, {{"nu0", 0.5}, {"r", 3.0}});
    Sampler serial = default_sampler(7);
    Sampler threaded = serial;
    threaded.threads = 4;
    auto a = check_derivative_signs(pl, serial);
    auto b = check_derivative_signs(pl, threaded);
    for (const auto& [k, v] : a.estimated_constants)
        CHECK(std::memcmp(&v, &b.estimated_constants.at(k), sizeof(double)) == 0);
}

TEST_CASE("sampler validation") {
    Sampler s;
    s.count = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = Sampler{};
    s.radius_schedule = {1.0, 0.5};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
