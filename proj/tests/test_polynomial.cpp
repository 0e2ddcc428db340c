#include <catch2/catch_amalgamated.hpp>

#include "funnelgate/polynomial.hpp"

using namespace funnelgate;

TEST_CASE("characteristic polynomials", "[polynomial]") {
    // third-order plant matrix: p^3 - p^2 - 5p - 3 == (p+1)^2 (p-3)
    const Mat a{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {3.0, 5.0, 1.0}};
    CHECK(char_poly(a) == Polynomial({-3.0, -5.0, -1.0, 1.0}));

    CHECK(char_poly(Mat::zero(2, 2)) == Polynomial({0.0, 0.0, 1.0}));
    CHECK(char_poly(Mat::identity(2)) == Polynomial({1.0, -2.0, 1.0}));
}

TEST_CASE("numerator polynomial L adj(pI - A) B", "[polynomial]") {
    const Mat a{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {3.0, 5.0, 1.0}};
    const Mat b{{0.0}, {0.0}, {1.0}};
    const Mat l{{1.0, 2.0, 1.0}};
    CHECK(numerator_poly(a, b, l) == Polynomial({1.0, 2.0, 1.0})); // (p+1)^2

    CHECK(numerator_poly(Mat::zero(1, 1), Mat{{1.0}}, Mat{{1.0}}) == Polynomial({1.0}));

    // adjugate by hand: adj(pI - A) = [[p+3, 1], [-2, p]]
    const Mat comp{{0.0, 1.0}, {-2.0, -3.0}};
    CHECK(numerator_poly(comp, Mat{{0.0}, {1.0}}, Mat{{1.0, 0.0}}) == Polynomial({1.0}));
}

TEST_CASE("closed-loop denominator is exact in integer arithmetic", "[polynomial]") {
    const Mat a{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {3.0, 5.0, 1.0}};
    const Mat b{{0.0}, {0.0}, {1.0}};
    const Mat l{{1.0, 2.0, 1.0}};
    const Polynomial q = char_poly(a);
    const Polynomial r = numerator_poly(a, b, l);
    const Polynomial q_bar = q - r * -4.0;
    CHECK(q_bar == Polynomial({1.0, 3.0, 3.0, 1.0})); // (p+1)^3, coefficient-exact
}

TEST_CASE("polynomial arithmetic", "[polynomial]") {
    const Polynomial p({1.0, 2.0, 1.0});
    CHECK(p.eval(2.0) == 9.0);
    CHECK(p.times_p() == Polynomial({0.0, 1.0, 2.0, 1.0}));
    CHECK((p * p) == Polynomial({1.0, 4.0, 6.0, 4.0, 1.0}));

    const auto [quot, rem] = divmod(Polynomial({0.0, 1.0, 2.0, 1.0}), Polynomial({1.0, 3.0, 3.0, 1.0}));
    CHECK(quot == Polynomial({1.0}));
    CHECK(rem == Polynomial({-1.0, -2.0, -1.0}));
    CHECK_THROWS_AS(divmod(p, Polynomial({0.0})), std::invalid_argument);

    CHECK(Polynomial({-3.0, -5.0, -1.0, 1.0}).to_string() == "p^3 - p^2 - 5p - 3");
}

TEST_CASE("Routh-Hurwitz stability test", "[polynomial]") {
    CHECK(is_hurwitz(Polynomial({1.0, 1.0})));                 // p + 1
    CHECK(is_hurwitz(Polynomial({1.0, 3.0, 3.0, 1.0})));       // (p+1)^3
    CHECK(is_hurwitz(Polynomial({1.0, 2.0, 1.0})));            // (p+1)^2
    CHECK_FALSE(is_hurwitz(Polynomial({-3.0, -5.0, -1.0, 1.0}))); // root at +3
    CHECK_FALSE(is_hurwitz(Polynomial({1.0, 0.0, 1.0})));      // roots +-i
    CHECK_FALSE(is_hurwitz(Polynomial({-1.0, 1.0})));          // root at +1
    CHECK(is_hurwitz(Polynomial({-1.0, -1.0})));               // -(p+1)
    // p^4 + 2p^3 + 3p^2 + 2p + 1: roots on the left (double pair)
    CHECK(is_hurwitz(Polynomial({1.0, 2.0, 3.0, 2.0, 1.0})));
}
