#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>

#include "funnelgate/matrix.hpp"
#include "funnelgate/polynomial.hpp"

// Plant models: the state-space plant x' = Ax + Bu + Df with |f| <= f_bar,
// the single-output plant y = Lx with its polynomial I/O form
// Q(p) y = R(p) u + phi(t), and the composite square/sine/held-noise
// disturbance used by the reproduction scenarios.

namespace funnelgate {

struct StatePlant {
    Mat A;     // n x n
    Mat B;     // n x 1
    Mat D;     // n x 1
    double f_bar = 0.0;

    int order() const { return A.rows(); }

    void check() const {
        if (!A.square()) throw std::invalid_argument("StatePlant: A not square");
        const int n = A.rows();
        if (B.rows() != n || B.cols() != 1) throw std::invalid_argument("StatePlant: bad B shape");
        if (D.rows() != n || D.cols() != 1) throw std::invalid_argument("StatePlant: bad D shape");
        if (f_bar < 0.0) throw std::invalid_argument("StatePlant: f_bar must be >= 0");
    }
};

// x' = A x + B u + D f
inline Vec plant_derivative(const StatePlant& plant, const Vec& x, double u, double f) {
    Vec dx = plant.A * x;
    for (int i = 0; i < plant.order(); ++i) dx[i] += plant.B(i, 0) * u + plant.D(i, 0) * f;
    return dx;
}

// ============================================================================
// Polynomial input/output form
// ============================================================================

struct IoForm {
    Polynomial Q;     // det(pI - A)
    Polynomial R;     // L adj(pI - A) B
    Polynomial Q_bar; // Q - k R  (loop closed with u1 = k y)
};

inline IoForm derive_io_form(const Mat& a, const Mat& b, const Mat& l, double k) {
    IoForm io;
    io.Q = char_poly(a);
    io.R = numerator_poly(a, b, l);
    if (io.R.is_zero())
        throw std::invalid_argument("derive_io_form: R(p) identically zero (degenerate I/O path)");
    io.Q_bar = io.Q - io.R * k;
    return io;
}

// L (sI - A)^{-1} B at a complex frequency, via complex Gaussian elimination.
// Independent of the adjugate route; used to cross-check R(s)/Q(s).
inline std::complex<double> frequency_response(const Mat& a, const Mat& b, const Mat& l,
                                               std::complex<double> s) {
    using C = std::complex<double>;
    const int n = a.rows();
    std::vector<C> m(static_cast<size_t>(n) * n);
    std::vector<C> rhs(n);
    for (int i = 0; i < n; ++i) {
        rhs[i] = b(i, 0);
        for (int j = 0; j < n; ++j) m[i * n + j] = (i == j ? s : C(0.0)) - C(a(i, j));
    }
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(m[i * n + k]) > std::abs(m[piv * n + k])) piv = i;
        if (std::abs(m[piv * n + k]) == 0.0)
            throw std::runtime_error("frequency_response: s is an eigenvalue of A");
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(m[k * n + j], m[piv * n + j]);
            std::swap(rhs[k], rhs[piv]);
        }
        for (int i = k + 1; i < n; ++i) {
            const C f = m[i * n + k] / m[k * n + k];
            for (int j = k; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
            rhs[i] -= f * rhs[k];
        }
    }
    std::vector<C> x(n);
    for (int i = n - 1; i >= 0; --i) {
        C acc = rhs[i];
        for (int j = i + 1; j < n; ++j) acc -= m[i * n + j] * x[j];
        x[i] = acc / m[i * n + i];
    }
    C y = 0.0;
    for (int i = 0; i < n; ++i) y += C(l(0, i)) * x[i];
    return y;
}

struct OutputPlant {
    StatePlant base;
    Mat L;              // 1 x n
    double phi_hat = 0.0;

    int order() const { return base.order(); }
    double output(const Vec& x) const { return (L * Mat::col(x))(0, 0); }

    // strict minimum phase: all roots of R in the open left half-plane
    void check() const {
        base.check();
        if (L.rows() != 1 || L.cols() != base.order())
            throw std::invalid_argument("OutputPlant: bad L shape");
        if (phi_hat < 0.0) throw std::invalid_argument("OutputPlant: phi_hat must be >= 0");
        const IoForm io = derive_io_form(base.A, base.B, L, 0.0);
        if (io.R.degree() >= io.Q.degree())
            throw std::invalid_argument("OutputPlant: deg R must be < deg Q");
        if (io.R.degree() >= 1 && !is_hurwitz(io.R))
            throw std::invalid_argument("OutputPlant: R(p) not Hurwitz (plant not minimum phase)");
    }
};

// ============================================================================
// Disturbance: amplitude * [sign(sin(w1 t)) + g sin(w2 t) + sat(d(t))]
// ============================================================================
//
// d(t) is a zero-order-hold Gaussian with variance noise_power/sample_time,
// the discrete equivalent of a band-limited white noise block. Each hold
// window draws one value from a counter-hashed stream, so evaluation is a
// pure function of (seed, t): deterministic and random-access.

struct DisturbanceSpec {
    double amplitude = 0.1;
    double square_freq = 1.7;
    double sine_gain = 0.2;
    double sine_freq = 0.3;
    double noise_power = 0.3;
    double sample_time = 0.2;
    std::uint64_t seed = 0;

    void check() const {
        if (sample_time <= 0.0) throw std::invalid_argument("DisturbanceSpec: sample_time must be > 0");
        if (noise_power < 0.0) throw std::invalid_argument("DisturbanceSpec: noise_power must be >= 0");
    }

    // |f| <= amplitude * (1 + sine_gain + 1) by construction
    double bound() const { return std::abs(amplitude) * (1.0 + std::abs(sine_gain) + 1.0); }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// standard normal from two hashed uniforms (Box-Muller)
inline double hashed_gaussian(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t h1 = splitmix64(seed ^ splitmix64(counter));
    const std::uint64_t h2 = splitmix64(h1);
    double u1 = static_cast<double>(h1 >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace detail

class Disturbance {
  public:
    explicit Disturbance(DisturbanceSpec spec) : spec_(spec) {
        spec_.check();
        sigma_ = std::sqrt(spec_.noise_power / spec_.sample_time);
    }

    const DisturbanceSpec& spec() const { return spec_; }
    Disturbance with_seed(std::uint64_t seed) const {
        DisturbanceSpec s = spec_;
        s.seed = seed;
        return Disturbance(s);
    }

    // held noise sample for the window containing t
    double noise(double t) const {
        if (spec_.noise_power == 0.0) return 0.0;
        // small forward nudge so a grid-aligned boundary instant picks the
        // window it opens
        const auto k = static_cast<std::uint64_t>(std::floor(t / spec_.sample_time + 1e-9));
        return detail::hashed_gaussian(spec_.seed, k) * sigma_;
    }

    double value(double t) const { return value_held(t, t); }

    // Smooth terms at t, the held-noise window taken from hold_t. A fixed-step
    // integrator passes its step's major time so that every stage of a step
    // sees one window, matching zero-order-hold semantics exactly.
    double value_held(double t, double hold_t) const {
        const double s = std::sin(spec_.square_freq * t);
        const double square = (s > 0.0) ? 1.0 : (s < 0.0 ? -1.0 : 0.0); // sign(0) := 0
        const double sat = std::clamp(noise(hold_t), -1.0, 1.0);
        return spec_.amplitude * (square + spec_.sine_gain * std::sin(spec_.sine_freq * t) + sat);
    }

    double operator()(double t) const { return value(t); }

  private:
    DisturbanceSpec spec_;
    double sigma_ = 0.0;
};

} // namespace funnelgate
