#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>

#include "funnelgate/plant.hpp"

using namespace funnelgate;

namespace {

double uniform(std::uint64_t& state, double lo, double hi) {
    state = detail::splitmix64(state);
    return lo + (hi - lo) * (static_cast<double>(state >> 11) * 0x1.0p-53);
}

int uniform_int(std::uint64_t& state, int lo, int hi) {
    state = detail::splitmix64(state);
    return lo + static_cast<int>(state % static_cast<std::uint64_t>(hi - lo + 1));
}

} // namespace

TEST_CASE("input/output form of the third-order plant", "[plant]") {
    const Mat a{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {3.0, 5.0, 1.0}};
    const Mat b{{0.0}, {0.0}, {1.0}};
    const Mat l{{1.0, 2.0, 1.0}};

    const IoForm io = derive_io_form(a, b, l, -4.0);
    CHECK(io.R == Polynomial({1.0, 2.0, 1.0}));        // (p+1)^2
    CHECK(io.Q == Polynomial({-3.0, -5.0, -1.0, 1.0})); // (p+1)^2 (p-3)
    CHECK(io.Q_bar == Polynomial({1.0, 3.0, 3.0, 1.0})); // (p+1)^3
    CHECK(io.Q != io.Q_bar); // the open-loop denominator is not (p+1)^3

    const IoForm scalar = derive_io_form(Mat{{-1.0}}, Mat{{1.0}}, Mat{{1.0}}, 0.0);
    CHECK(scalar.Q == Polynomial({1.0, 1.0}));
    CHECK(scalar.R == Polynomial({1.0}));
    CHECK(scalar.Q_bar == scalar.Q); // k = 0 leaves the denominator alone

    // L orthogonal to the reachable path: degenerate
    CHECK_THROWS_AS(derive_io_form(Mat{{0.0, 0.0}, {0.0, 1.0}}, Mat{{0.0}, {1.0}},
                                   Mat{{1.0, 0.0}}, 0.0),
                    std::invalid_argument);
}

TEST_CASE("adjugate route matches the resolvent at sampled frequencies", "[plant]") {
    std::uint64_t state = 0xace5;
    int done = 0;
    while (done < 200) {
        const int n = uniform_int(state, 1, 4);
        Mat a(n, n), b(n, 1), l(1, n);
        for (int i = 0; i < n; ++i) {
            b(i, 0) = uniform_int(state, -2, 2);
            l(0, i) = uniform_int(state, -2, 2);
            for (int j = 0; j < n; ++j) a(i, j) = uniform_int(state, -3, 3);
        }
        Polynomial q, r;
        try {
            const IoForm io = derive_io_form(a, b, l, 0.0);
            q = io.Q;
            r = io.R;
        } catch (const std::invalid_argument&) {
            continue; // R identically zero: uninteresting draw
        }
        ++done;
        for (int sample = 0; sample < 10; ++sample) {
            const std::complex<double> s(uniform(state, 0.5, 4.0), uniform(state, -3.0, 3.0));
            const std::complex<double> denom = q.eval(s);
            if (std::abs(denom) < 1e-6) continue;
            const std::complex<double> by_resolvent = frequency_response(a, b, l, s);
            const std::complex<double> by_poly = r.eval(s) / denom;
            const double scale = std::max(1.0, std::abs(by_poly));
            REQUIRE(std::abs(by_resolvent - by_poly) / scale < 1e-8);
        }
    }
}

TEST_CASE("plant derivative", "[plant]") {
    const StatePlant plant{Mat{{0.0, 1.0}, {1.0, 2.0}}, Mat{{0.0}, {1.0}}, Mat{{0.1}, {1.0}},
                           0.22};
    const Vec zero = plant_derivative(plant, {0.0, 0.0}, 0.0, 0.0);
    CHECK(zero == Vec{0.0, 0.0});

    const Vec free_motion = plant_derivative(plant, {-1.0, 1.0}, 0.0, 0.0);
    CHECK(free_motion[0] == 1.0);
    CHECK(free_motion[1] == 1.0);

    // superposition
    std::uint64_t state = 77;
    for (int trial = 0; trial < 20; ++trial) {
        const Vec x1{uniform(state, -2, 2), uniform(state, -2, 2)};
        const Vec x2{uniform(state, -2, 2), uniform(state, -2, 2)};
        const double u = uniform(state, -1, 1), f = uniform(state, -0.2, 0.2);
        const Vec lhs = plant_derivative(plant, {x1[0] + x2[0], x1[1] + x2[1]}, u, f);
        const Vec a = plant_derivative(plant, x1, u, f);
        const Vec b = plant_derivative(plant, x2, 0.0, 0.0);
        for (int i = 0; i < 2; ++i) CHECK(lhs[i] == Catch::Approx(a[i] + b[i]).margin(1e-12));
    }
}

TEST_CASE("minimum-phase validation of the output plant", "[plant]") {
    OutputPlant good{{Mat{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {3.0, 5.0, 1.0}},
                      Mat{{0.0}, {0.0}, {1.0}}, Mat{{0.1}, {0.2}, {1.0}}, 0.22},
                     Mat{{1.0, 2.0, 1.0}},
                     0.22};
    CHECK_NOTHROW(good.check());

    // numerator root at +1: not minimum phase
    OutputPlant bad = good;
    bad.L = Mat{{-1.0, 0.0, 1.0}}; // L adj(pI-A) B = p^2 - 1
    CHECK_THROWS_AS(bad.check(), std::invalid_argument);
}

TEST_CASE("disturbance: zero gains give zero", "[plant]") {
    const Disturbance off(DisturbanceSpec{0.0, 1.7, 0.0, 0.3, 0.0, 0.2, 9});
    for (double t = 0.0; t < 10.0; t += 0.37) CHECK(off(t) == 0.0);
}

TEST_CASE("disturbance: noise-free closed form", "[plant]") {
    const Disturbance d(DisturbanceSpec{0.1, 1.7, 0.2, 0.3, 0.0, 0.2, 0});
    for (double t : {0.13, 0.9, 2.4, 7.7}) {
        const double s = std::sin(1.7 * t);
        const double expected = 0.1 * ((s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0)) +
                                       0.2 * std::sin(0.3 * t));
        CHECK(d(t) == Catch::Approx(expected).margin(1e-15));
    }
    CHECK(d(0.0) == Catch::Approx(0.0).margin(1e-15)); // sign(sin 0) = 0
}

TEST_CASE("disturbance bound and determinism", "[plant]") {
    for (std::uint64_t seed : {1ULL, 17ULL, 912ULL}) {
        const Disturbance d(DisturbanceSpec{0.1, 1.7, 0.2, 0.3, 0.3, 0.2, seed});
        const Disturbance same(DisturbanceSpec{0.1, 1.7, 0.2, 0.3, 0.3, 0.2, seed});
        double max_abs = 0.0;
        for (double t = 0.0; t <= 100.0; t += 0.003) {
            const double v = d(t);
            CHECK(v == same(t)); // bitwise
            max_abs = std::max(max_abs, std::abs(v));
        }
        CHECK(max_abs <= 0.22);
        CHECK(d.spec().bound() == Catch::Approx(0.22));
    }

    // different seeds have to differ somewhere
    const Disturbance a(DisturbanceSpec{0.1, 1.7, 0.2, 0.3, 0.3, 0.2, 1});
    const Disturbance b(DisturbanceSpec{0.1, 1.7, 0.2, 0.3, 0.3, 0.2, 2});
    bool differs = false;
    for (double t = 0.0; t < 20.0 && !differs; t += 0.1) differs = a(t) != b(t);
    CHECK(differs);
}

TEST_CASE("held noise is constant within a window", "[plant]") {
    const Disturbance d(DisturbanceSpec{0.1, 1.7, 0.2, 0.3, 0.3, 0.2, 5});
    const double base = d.noise(0.45);
    for (double t = 0.401; t < 0.599; t += 0.013) CHECK(d.noise(t) == base);
    CHECK(d.noise(0.61) != base);
}
