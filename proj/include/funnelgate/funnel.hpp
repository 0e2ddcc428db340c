#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

// The time-varying corridor (g_lo(t), g_hi(t)) that the constraint aggregate
// must occupy. Bound curves are restricted to three closed-form families so
// that derivatives and infima are exact; no symbolic machinery is needed.

namespace funnelgate {

enum class CurveFamily { Constant, ExpOffset, CosOffset };

inline const char* to_string(CurveFamily f) {
    switch (f) {
        case CurveFamily::Constant: return "constant";
        case CurveFamily::ExpOffset: return "exp_offset";
        case CurveFamily::CosOffset: return "cos_offset";
    }
    return "?";
}

// value(t) = a                    (Constant)
//          = a * exp(c t) + b     (ExpOffset)
//          = a * cos(c t) + b     (CosOffset)
struct BoundCurve {
    CurveFamily family = CurveFamily::Constant;
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;

    static BoundCurve constant(double v) { return {CurveFamily::Constant, v, 0.0, 0.0}; }
    static BoundCurve exp_offset(double a, double b, double c) {
        return {CurveFamily::ExpOffset, a, b, c};
    }
    static BoundCurve cos_offset(double a, double b, double c) {
        return {CurveFamily::CosOffset, a, b, c};
    }

    double value(double t) const {
        switch (family) {
            case CurveFamily::Constant: return a;
            case CurveFamily::ExpOffset: return a * std::exp(c * t) + b;
            case CurveFamily::CosOffset: return a * std::cos(c * t) + b;
        }
        return 0.0;
    }

    double derivative(double t) const {
        switch (family) {
            case CurveFamily::Constant: return 0.0;
            case CurveFamily::ExpOffset: return a * c * std::exp(c * t);
            case CurveFamily::CosOffset: return -a * c * std::sin(c * t);
        }
        return 0.0;
    }

    // Exact infimum over t >= 0.
    double infimum() const {
        switch (family) {
            case CurveFamily::Constant: return a;
            case CurveFamily::ExpOffset:
                if (c == 0.0 || a == 0.0) return a + b;
                if (c < 0.0) return a > 0.0 ? b : a + b;       // decay: floor b or start a+b
                return a > 0.0 ? a + b : -std::numeric_limits<double>::infinity();
            case CurveFamily::CosOffset: return c == 0.0 ? a + b : b - std::abs(a);
        }
        return 0.0;
    }

    // sup over t >= 0 of |derivative|; infinite for growing exponentials
    double derivative_sup() const {
        switch (family) {
            case CurveFamily::Constant: return 0.0;
            case CurveFamily::ExpOffset:
                if (c == 0.0 || a == 0.0) return 0.0;
                return c < 0.0 ? std::abs(a * c) : std::numeric_limits<double>::infinity();
            case CurveFamily::CosOffset: return std::abs(a * c);
        }
        return 0.0;
    }

    // value(t) > 0 for all t >= 0, decided analytically per family. The one
    // open-endpoint case (decaying positive exponential with b == 0) is
    // positive for every finite t although its infimum is 0.
    bool strictly_positive() const {
        if (family == CurveFamily::ExpOffset && c < 0.0 && a > 0.0 && b == 0.0) return true;
        return infimum() > 0.0;
    }
};

// ============================================================================
// FunnelBounds
// ============================================================================

class FunnelBounds {
  public:
    // Validates positivity of both bounds, a positive gap (analytic when the
    // curves share a family and rate, always backed by a 1e-3 grid audit on
    // [0, audit_horizon]), and gamma >= the audited sup of |dPhi/dt|.
    FunnelBounds(BoundCurve lower, BoundCurve upper, double gamma, double audit_horizon = 100.0)
        : lower_(lower), upper_(upper), gamma_(gamma), audit_horizon_(audit_horizon) {
        if (gamma <= 0.0) throw std::invalid_argument("FunnelBounds: gamma must be > 0");
        if (audit_horizon <= 0.0) throw std::invalid_argument("FunnelBounds: horizon must be > 0");
        if (!lower_.strictly_positive())
            throw std::invalid_argument("FunnelBounds: lower bound is not positive for all t>=0");
        if (!upper_.strictly_positive())
            throw std::invalid_argument("FunnelBounds: upper bound is not positive for all t>=0");
        validate_gap();
        const double sup = audit_gamma(audit_horizon_);
        if (sup > gamma_)
            throw std::invalid_argument("FunnelBounds: gamma " + std::to_string(gamma_) +
                                        " below audited sup |dPhi/dt| = " + std::to_string(sup));
    }

    const BoundCurve& lower() const { return lower_; }
    const BoundCurve& upper() const { return upper_; }
    double gamma() const { return gamma_; }
    double audit_horizon() const { return audit_horizon_; }

    double g_lo(double t) const { return lower_.value(t); }
    double g_hi(double t) const { return upper_.value(t); }
    double g_lo_dot(double t) const { return lower_.derivative(t); }
    double g_hi_dot(double t) const { return upper_.derivative(t); }
    double width(double t) const { return g_hi(t) - g_lo(t); }
    double midpoint(double t) const { return 0.5 * (g_lo(t) + g_hi(t)); }
    double inf_upper() const { return upper_.infimum(); }

    // Grid estimate of sup |dPhi/dt|. The derivative is affine in T, so its
    // supremum over |T| < 1 at fixed t is max(|g_hi_dot|, |g_lo_dot|).
    double audit_gamma(double horizon) const {
        if (horizon <= 0.0) throw std::invalid_argument("audit_gamma: horizon must be > 0");
        constexpr double kStep = 1e-3;
        double sup = 0.0;
        const long n = static_cast<long>(std::ceil(horizon / kStep));
        for (long i = 0; i <= n; ++i) {
            const double t = std::min(i * kStep, horizon);
            sup = std::max(sup, std::max(std::abs(g_hi_dot(t)), std::abs(g_lo_dot(t))));
        }
        return sup;
    }

  private:
    void validate_gap() const {
        // closed-form minimum of the gap when the difference stays in-family
        double analytic_min = std::numeric_limits<double>::quiet_NaN();
        if (lower_.family == CurveFamily::Constant && upper_.family == CurveFamily::Constant) {
            analytic_min = upper_.a - lower_.a;
        } else if (lower_.family == CurveFamily::Constant &&
                   upper_.family != CurveFamily::Constant) {
            BoundCurve d = upper_;
            d.b -= lower_.a;
            analytic_min = d.infimum();
        } else if (upper_.family == CurveFamily::Constant &&
                   lower_.family != CurveFamily::Constant) {
            BoundCurve d = lower_;
            d.a = -d.a;
            d.b = upper_.a - d.b;
            analytic_min = d.infimum();
        } else if (lower_.family == upper_.family && lower_.c == upper_.c) {
            BoundCurve d{lower_.family, upper_.a - lower_.a, upper_.b - lower_.b, lower_.c};
            analytic_min = d.infimum();
        }
        if (!std::isnan(analytic_min) && analytic_min <= 0.0 &&
            !(analytic_min == 0.0 && gap_open_at_infinity()))
            throw std::invalid_argument("FunnelBounds: upper - lower not positive for all t>=0");

        constexpr double kStep = 1e-3;
        const long n = static_cast<long>(std::ceil(audit_horizon_ / kStep));
        for (long i = 0; i <= n; ++i) {
            const double t = std::min(i * kStep, audit_horizon_);
            if (width(t) <= 0.0)
                throw std::invalid_argument("FunnelBounds: gap audit failed at t = " +
                                            std::to_string(t));
        }
    }

    bool gap_open_at_infinity() const {
        // decaying exponential gap with zero offset: positive for finite t
        return lower_.family == upper_.family && lower_.family == CurveFamily::ExpOffset &&
               lower_.c == upper_.c && lower_.c < 0.0 && upper_.a > lower_.a &&
               upper_.b == lower_.b;
    }

    BoundCurve lower_;
    BoundCurve upper_;
    double gamma_;
    double audit_horizon_;
};

} // namespace funnelgate
