#pragma once

#include <cmath>
#include <stdexcept>

#include "funnelgate/funnel.hpp"

// The coordinate change xi = Phi(eps, t) that maps the whole real line onto
// the open funnel:
//
//   Phi(eps, t) = (g_hi - g_lo)/2 * T(eps) + (g_lo + g_hi)/2
//
// with T a strictly increasing squashing of R onto (-1, 1). Boundedness of
// eps is then equivalent to the aggregate staying strictly inside the funnel.

namespace funnelgate {

enum class TransformKind { Rational, TanhHalf, Arctan };

inline const char* to_string(TransformKind k) {
    switch (k) {
        case TransformKind::Rational: return "rational";
        case TransformKind::TanhHalf: return "tanh_half";
        case TransformKind::Arctan: return "arctan";
    }
    return "?";
}

struct TransformSpec {
    TransformKind kind;
    FunnelBounds funnel;
};

// how close |T| may get to 1 before the inverse is clamped
inline constexpr double kSquashClamp = 1.0 - 1e-15;

// T(eps): rational eps/(1+|eps|), tanh(eps/2), or (2/pi) atan(eps)
inline double eval_T(const TransformSpec& spec, double eps) {
    switch (spec.kind) {
        case TransformKind::Rational: return eps / (1.0 + std::abs(eps));
        case TransformKind::TanhHalf: return std::tanh(0.5 * eps);
        case TransformKind::Arctan: return (2.0 / M_PI) * std::atan(eps);
    }
    return 0.0;
}

// T'(eps) > 0 everywhere
inline double eval_T_prime(const TransformSpec& spec, double eps) {
    switch (spec.kind) {
        case TransformKind::Rational: {
            const double d = 1.0 + std::abs(eps);
            return 1.0 / (d * d);
        }
        case TransformKind::TanhHalf: {
            const double th = std::tanh(0.5 * eps);
            return 0.5 * (1.0 - th * th);
        }
        case TransformKind::Arctan: return (2.0 / M_PI) / (1.0 + eps * eps);
    }
    return 0.0;
}

inline double eval_T_inverse(const TransformSpec& spec, double s) {
    switch (spec.kind) {
        case TransformKind::Rational: return s / (1.0 - std::abs(s));
        case TransformKind::TanhHalf: return std::log((1.0 + s) / (1.0 - s)); // 2 atanh(s)
        case TransformKind::Arctan: return std::tan(0.5 * M_PI * s);
    }
    return 0.0;
}

inline double phi(const TransformSpec& spec, double eps, double t) {
    const double lo = spec.funnel.g_lo(t), hi = spec.funnel.g_hi(t);
    double v = 0.5 * (hi - lo) * eval_T(spec, eps) + 0.5 * (lo + hi);
    // tanh saturates to exactly 1 in double precision near eps ~ 38; the
    // image must stay in the open funnel, so nudge off the boundary
    if (v >= hi) v = std::nextafter(hi, lo);
    if (v <= lo) v = std::nextafter(lo, hi);
    return v;
}

struct InverseResult {
    double eps;
    bool clamped; // |T| hit the clamp: numerical stress near the boundary
};

// Inverse with the squash clamped to +/-(1 - 1e-15); never throws. Used by
// the simulator to keep mapping a trajectory after a bound crossing.
inline InverseResult phi_inv_clamped(const TransformSpec& spec, double xi, double t) {
    const double lo = spec.funnel.g_lo(t), hi = spec.funnel.g_hi(t);
    double s = (2.0 * xi - lo - hi) / (hi - lo);
    bool clamped = false;
    if (s > kSquashClamp) {
        s = kSquashClamp;
        clamped = true;
    } else if (s < -kSquashClamp) {
        s = -kSquashClamp;
        clamped = true;
    }
    return {eval_T_inverse(spec, s), clamped};
}

// Closed-form inverse of phi. Requires xi strictly inside the open funnel;
// a violation upstream surfaces here as a domain error.
inline double phi_inv(const TransformSpec& spec, double xi, double t) {
    const double lo = spec.funnel.g_lo(t), hi = spec.funnel.g_hi(t);
    if (!(lo < xi && xi < hi))
        throw std::domain_error("phi_inv: xi outside the open funnel");
    return phi_inv_clamped(spec, xi, t).eps;
}

// dPhi/deps = (g_hi - g_lo)/2 * T'(eps) > 0
inline double dphi_deps(const TransformSpec& spec, double eps, double t) {
    return 0.5 * spec.funnel.width(t) * eval_T_prime(spec, eps);
}

// dPhi/dt = (g_hi_dot - g_lo_dot)/2 * T(eps) + (g_lo_dot + g_hi_dot)/2
inline double dphi_dt(const TransformSpec& spec, double eps, double t) {
    const double dlo = spec.funnel.g_lo_dot(t), dhi = spec.funnel.g_hi_dot(t);
    return 0.5 * (dhi - dlo) * eval_T(spec, eps) + 0.5 * (dlo + dhi);
}

} // namespace funnelgate
