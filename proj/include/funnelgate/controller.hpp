#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "funnelgate/matrix.hpp"
#include "funnelgate/plant.hpp"
#include "funnelgate/polynomial.hpp"
#include "funnelgate/transform.hpp"

// The composite control law u = u1 + u2: a linear stabilizer u1 plus the
// dynamic term u2 whose rate law keeps the aggregate
//
//   xi = x'P1x + p2 u1^2 + p3 (|u2| + delta)^2         (state feedback)
//   xi = p1 y^2 + p2 u1^2 + p3 (|u2| + delta)^2        (output feedback)
//
// strictly inside the funnel. p2 = p0(1+r) and p3 = p0(1+1/r) come from the
// Young split u^2 <= (1+r) u1^2 + (1+1/r) u2^2.

namespace funnelgate {

// sign with sign(0) = +1; used on u2 so the rate law is never inert
inline double sign_positive(double v) { return v >= 0.0 ? 1.0 : -1.0; }
// sign with sign(0) = 0; used on eps so the mu-term vanishes at the center
inline double sign_zero(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// ============================================================================
// ConstraintWeights
// ============================================================================

struct ConstraintWeights {
    std::optional<Mat> P1;     // state case: P1 > 0
    std::optional<double> p1;  // output case: p1 > 0
    double p0 = 0.0;
    double r = 0.0;
    double delta = 0.0;
    double mu = 0.0;
    BoundCurve l_x = BoundCurve::constant(1.0); // state bound level (or l_y, output case)
    BoundCurve l_u = BoundCurve::constant(1.0);

    double p2() const { return p0 * (1.0 + r); }
    double p3() const { return p0 * (1.0 + 1.0 / r); }

    void check() const {
        if (p0 <= 0.0 || r <= 0.0) throw std::invalid_argument("weights: p0, r must be > 0");
        if (delta <= 0.0) throw std::invalid_argument("weights: delta must be > 0");
        if (mu <= 0.0) throw std::invalid_argument("weights: mu must be > 0");
        if (P1.has_value() == p1.has_value())
            throw std::invalid_argument("weights: exactly one of P1 / p1 expected");
        if (p1 && *p1 <= 0.0) throw std::invalid_argument("weights: p1 must be > 0");
    }
};

// ============================================================================
// State feedback (u1 = K x)
// ============================================================================

class StateFeedbackLaw {
  public:
    StateFeedbackLaw(const StatePlant& plant, Mat k_row, ConstraintWeights weights, double alpha,
                     TransformSpec transform, double u2_init = 0.01)
        : K_(std::move(k_row)), weights_(std::move(weights)), alpha_(alpha),
          transform_(std::move(transform)), u2_init_(u2_init) {
        weights_.check();
        if (!weights_.P1) throw std::invalid_argument("StateFeedbackLaw: weights must carry P1");
        if (alpha_ <= 0.0) throw std::invalid_argument("StateFeedbackLaw: alpha must be > 0");
        const int n = plant.order();
        if (K_.rows() != 1 || K_.cols() != n)
            throw std::invalid_argument("StateFeedbackLaw: bad K shape");
        A_bar_ = plant.A + plant.B * K_;
        B_ = plant.B;
        // P1_bar = P1 + p2 K'K
        P1_bar_ = SymMatrix::from_lower(*weights_.P1 + K_.transpose() * K_ * weights_.p2());
        if (!is_positive_definite(P1_bar_))
            throw std::invalid_argument("StateFeedbackLaw: P1_bar not positive definite");
        P1_bar_sq_ = SymMatrix::from_lower(P1_bar_.mat() * P1_bar_.mat());
        hurwitz_ = is_hurwitz(char_poly(A_bar_)); // advisory; the certificate is the gate
    }

    const Mat& K() const { return K_; }
    const Mat& A_bar() const { return A_bar_; }
    const SymMatrix& P1_bar() const { return P1_bar_; }
    const ConstraintWeights& weights() const { return weights_; }
    double alpha() const { return alpha_; }
    const TransformSpec& transform() const { return transform_; }
    double u2_init() const { return u2_init_; }
    bool closed_loop_hurwitz() const { return hurwitz_; }

    double u1(const Vec& x) const { return (K_ * Mat::col(x))(0, 0); }

    // xi = x'P1x + p2 u1^2 + p3 (|u2|+delta)^2
    double xi_raw(const Vec& x, double u1v, double u2) const {
        const double g = std::abs(u2) + weights_.delta;
        return quad_form(*weights_.P1, x) + weights_.p2() * u1v * u1v + weights_.p3() * g * g;
    }

    // reduced form x'P1_bar x + p3 (|u2|+delta)^2, valid when u1 = Kx
    double xi(const Vec& x, double u2) const {
        const double g = std::abs(u2) + weights_.delta;
        return quad_form(P1_bar_.mat(), x) + weights_.p3() * g * g;
    }

    // u2' = -2/(p3(|u2|+delta)) sign(u2) [ alpha eps + 2x'P1_bar A_bar x
    //                                      + 2x'P1_bar B u2 + mu sign(eps) x'P1_bar^2 x ]
    double u2_derivative(const Vec& x, double u2, double eps) const {
        const Vec px = P1_bar_.mat() * x;
        const double bracket = alpha_ * eps + 2.0 * dot(px, A_bar_ * x) +
                               2.0 * dot(px, column_of(B_)) * u2 +
                               weights_.mu * sign_zero(eps) * quad_form(P1_bar_sq_.mat(), x);
        return -2.0 / (weights_.p3() * (std::abs(u2) + weights_.delta)) * sign_positive(u2) *
               bracket;
    }

  private:
    static Vec column_of(const Mat& m) {
        Vec v(m.rows());
        for (int i = 0; i < m.rows(); ++i) v[i] = m(i, 0);
        return v;
    }

    Mat K_;
    Mat A_bar_;
    Mat B_;
    SymMatrix P1_bar_{1};
    SymMatrix P1_bar_sq_{1};
    ConstraintWeights weights_;
    double alpha_;
    TransformSpec transform_;
    double u2_init_;
    bool hurwitz_ = false;
};

// ============================================================================
// Filter realization for the output-feedback rate law
// ============================================================================

struct FilterRealization {
    Mat A;       // m x m companion of Q_bar
    Mat B;       // m x 1
    Mat C;       // 1 x m
    double D = 0.0;
    int order() const { return A.rows(); }

    double output(const Vec& state, double input) const {
        return (order() ? (C * Mat::col(state))(0, 0) : 0.0) + D * input;
    }
    Vec derivative(const Vec& state, double input) const {
        Vec dx = A * state;
        for (int i = 0; i < order(); ++i) dx[i] += B(i, 0) * input;
        return dx;
    }
};

// Controllable-canonical realization of the (generally biproper) transfer
// p R(p) / Q_bar(p): feedthrough from the leading-coefficient ratio when the
// degrees match, strictly proper remainder realized over companion(Q_bar).
inline FilterRealization realize_filter(const Polynomial& r, const Polynomial& q_bar) {
    if (r.is_zero()) return FilterRealization{Mat(0, 0), Mat(0, 1), Mat(1, 0), 0.0};
    const Polynomial num = r.times_p();
    if (num.degree() > q_bar.degree())
        throw std::invalid_argument("realize_filter: p*R/Q_bar is improper");
    if (!is_hurwitz(q_bar))
        throw std::invalid_argument("realize_filter: Q_bar not Hurwitz (filter unstable)");

    FilterRealization f;
    f.D = num.degree() == q_bar.degree() ? num.leading() / q_bar.leading() : 0.0;
    const Polynomial rem = num - q_bar * f.D; // degree <= m-1
    const int m = q_bar.degree();
    const double lead = q_bar.leading();
    f.A = Mat(m, m);
    for (int i = 0; i + 1 < m; ++i) f.A(i, i + 1) = 1.0;
    for (int j = 0; j < m; ++j) f.A(m - 1, j) = -q_bar.coeff(j) / lead;
    f.B = Mat(m, 1);
    f.B(m - 1, 0) = 1.0;
    f.C = Mat(1, m);
    for (int j = 0; j < m; ++j) f.C(0, j) = rem.coeff(j) / lead;
    return f;
}

// ============================================================================
// Output feedback (u1 = k y)
// ============================================================================

class OutputFeedbackLaw {
  public:
    OutputFeedbackLaw(const OutputPlant& plant, double k, ConstraintWeights weights, double alpha,
                      TransformSpec transform, double u2_init = 0.01)
        : k_(k), weights_(std::move(weights)), alpha_(alpha), transform_(std::move(transform)),
          u2_init_(u2_init) {
        weights_.check();
        if (!weights_.p1) throw std::invalid_argument("OutputFeedbackLaw: weights must carry p1");
        if (alpha_ <= 0.0) throw std::invalid_argument("OutputFeedbackLaw: alpha must be > 0");
        p1_bar_ = *weights_.p1 + k_ * k_ * weights_.p2();
        io_ = derive_io_form(plant.base.A, plant.base.B, plant.L, k_);
        filter_ = realize_filter(io_.R, io_.Q_bar);
        A_bar_ = plant.base.A + plant.base.B * plant.L * k_;
    }

    double k() const { return k_; }
    double p1_bar() const { return p1_bar_; }
    const IoForm& io() const { return io_; }
    const FilterRealization& filter() const { return filter_; }
    const Mat& A_bar() const { return A_bar_; }
    const ConstraintWeights& weights() const { return weights_; }
    double alpha() const { return alpha_; }
    const TransformSpec& transform() const { return transform_; }
    double u2_init() const { return u2_init_; }

    double u1(double y) const { return k_ * y; }

    // xi = p1 y^2 + p2 u1^2 + p3 (|u2|+delta)^2 = p1_bar y^2 + p3 (|u2|+delta)^2
    double xi(double y, double u2) const {
        const double g = std::abs(u2) + weights_.delta;
        return p1_bar_ * y * y + weights_.p3() * g * g;
    }

    // u2' = -2/(p3(|u2|+delta)) sign(u2) [ alpha eps + 2 p1_bar y w
    //                                      + mu p1_bar^2 sign(eps) y^2 ]
    // with w the current output of the realized p R / Q_bar filter.
    double u2_derivative(double y, double w, double u2, double eps) const {
        const double bracket = alpha_ * eps + 2.0 * p1_bar_ * y * w +
                               weights_.mu * p1_bar_ * p1_bar_ * sign_zero(eps) * y * y;
        return -2.0 / (weights_.p3() * (std::abs(u2) + weights_.delta)) * sign_positive(u2) *
               bracket;
    }

  private:
    double k_;
    double p1_bar_ = 0.0;
    IoForm io_;
    FilterRealization filter_;
    Mat A_bar_;
    ConstraintWeights weights_;
    double alpha_;
    TransformSpec transform_;
    double u2_init_;
};

// ============================================================================
// eps-dynamics reference (verification oracle)
// ============================================================================

// eps' = (xi' - dPhi/dt) / (dPhi/deps). The controllers recover eps
// algebraically through phi_inv each step; this expression exists to
// cross-check that choice against the integrated eps-dynamics.
inline double eps_dot_reference(const TransformSpec& transform, double xi_dot, double eps,
                                double t) {
    return (xi_dot - dphi_dt(transform, eps, t)) / dphi_deps(transform, eps, t);
}

} // namespace funnelgate
