#include <cmath>

#include "doctest.h"
#include "rheo/rng.hpp"
#include "rheo/tensor.hpp"

using namespace rheo;

TEST_CASE("inner product basics") {
    auto I = SymTensor2::identity(2);
    CHECK(inner(I, I) == doctest::Approx(2.0));
    CHECK(inner(SymTensor2::identity(3), SymTensor2::identity(3)) == doctest::Approx(3.0));

    auto A = SymTensor2::diag2(1.0, -1.0);
    CHECK(inner(A, SymTensor2::zero(2)) == 0.0);
    CHECK(inner(A, A) == doctest::Approx(2.0));

    // off-diagonal entries count twice
    auto B = SymTensor2::offdiag2(3.0);
    CHECK(inner(B, B) == doctest::Approx(18.0));
    CHECK(frobenius_norm(B) == doctest::Approx(3.0 * std::sqrt(2.0)));

    CHECK_THROWS_AS(inner(I, SymTensor2::identity(3)), std::invalid_argument);
}

TEST_CASE("inner is bilinear and symmetric on random tensors") {
    Rng rng(7);
    for (int dim : {2, 3}) {
        for (int k = 0; k < 50; ++k) {
            auto A = rng.normal_tensor(dim);
            auto B = rng.normal_tensor(dim);
            auto C = rng.normal_tensor(dim);
            double a = rng.uniform(-2.0, 2.0);
            CHECK(inner(A, B) == doctest::Approx(inner(B, A)));
            CHECK(inner(A + a * B, C) == doctest::Approx(inner(A, C) + a * inner(B, C)));
            CHECK(frobenius_norm(A) >= 0.0);
        }
        CHECK(frobenius_norm(SymTensor2::zero(dim)) == 0.0);
    }
}

TEST_CASE("vector algebra") {
    Vec a(1.0, 2.0), b(-3.0, 0.5);
    CHECK(dot(a, b) == doctest::Approx(-2.0));
    CHECK(norm(Vec(3.0, 4.0)) == doctest::Approx(5.0));
    CHECK(dot(a, b) == doctest::Approx(dot(b, a)));
    Vec c(1.0, 2.0, 3.0);
    CHECK_THROWS_AS(dot(a, c), std::invalid_argument);
}
