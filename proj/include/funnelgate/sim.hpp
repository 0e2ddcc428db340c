#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "funnelgate/controller.hpp"
#include "funnelgate/lmi.hpp"
#include "funnelgate/plant.hpp"

// Fixed-step closed-loop integration: classical RK4 over the joint state
// [x; u2] (state feedback) or [x; u2; filter state] (output feedback), with
// controller quantities recomputed at every stage, funnel/set monitoring at
// every completed step, and the V1/V2 diagnostics along the way.

namespace funnelgate {

struct SimConfig {
    double step = 1e-3;
    double horizon = 100.0;
    int record_stride = 1;
    std::uint64_t seed = 0;
    bool track_eps_integral = false;   // carry the eps-dynamics oracle as an extra state
    double eps_integral_start = 0.0;   // grid time at which the oracle state is seeded

    void check() const {
        if (step <= 0.0) throw std::invalid_argument("SimConfig: step must be > 0");
        if (horizon < step) throw std::invalid_argument("SimConfig: horizon must be >= step");
        if (record_stride < 1) throw std::invalid_argument("SimConfig: record_stride must be >= 1");
    }
};

struct TrajectoryPoint {
    double t = 0.0;
    Vec x;
    double y = 0.0;  // output case only
    double u1 = 0.0;
    double u2 = 0.0;
    double u = 0.0;
    double xi = 0.0;
    double eps = 0.0;
    double f = 0.0;
    double v1 = 0.0; // 0.5 eps^2
    double v2 = 0.0; // x'Hx when a certificate H is supplied
    double eps_int = std::numeric_limits<double>::quiet_NaN();
    bool in_funnel = true;
    bool in_x = true; // state-set flag; carries the Y-set flag in the output case
    bool in_u = true;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    int state_dim = 0;
    bool output_case = false;
    bool has_v2 = false;
    double max_eps_integral_drift = 0.0; // only meaningful with track_eps_integral
};

struct ViolationReport {
    long funnel_exits = 0;
    long x_exits = 0; // Y-set exits in the output case
    long u_exits = 0;
    long clamp_events = 0;
    long nonfinite = 0;
    double first_funnel_exit = -1.0;
    double first_x_exit = -1.0;
    double first_u_exit = -1.0;
    double first_clamp = -1.0;
    double first_nonfinite = -1.0;
    double min_funnel_margin = std::numeric_limits<double>::infinity();
    double min_x_margin = std::numeric_limits<double>::infinity();
    double min_u_margin = std::numeric_limits<double>::infinity();

    bool all_clear() const {
        return funnel_exits == 0 && x_exits == 0 && u_exits == 0 && clamp_events == 0 &&
               nonfinite == 0;
    }
};

namespace detail {

inline void note(long& count, double& first, double t) {
    if (count++ == 0) first = t;
}

// noise hold windows must open exactly on the integration grid
inline void check_hold_alignment(const DisturbanceSpec& spec, double step) {
    if (spec.noise_power == 0.0) return;
    const double m = std::round(spec.sample_time / step);
    if (m < 1.0 || std::abs(spec.sample_time - m * step) > 1e-9 * spec.sample_time)
        throw std::invalid_argument(
            "simulation: disturbance sample_time must be an integer multiple of the step");
}

template <class Deriv>
inline void rk4_step(const Deriv& deriv, double t, double h, Vec& z, Vec& k1, Vec& k2, Vec& k3,
                     Vec& k4, Vec& tmp) {
    const size_t n = z.size();
    deriv(t, z, k1);
    for (size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * h * k1[i];
    deriv(t + 0.5 * h, tmp, k2);
    for (size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * h * k2[i];
    deriv(t + 0.5 * h, tmp, k3);
    for (size_t i = 0; i < n; ++i) tmp[i] = z[i] + h * k3[i];
    deriv(t + h, tmp, k4);
    for (size_t i = 0; i < n; ++i) z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

} // namespace detail

// ============================================================================
// State feedback closed loop (Example 2 shape)
// ============================================================================

inline std::pair<Trajectory, ViolationReport>
run_state_feedback(const StatePlant& plant, const StateFeedbackLaw& law, const Vec& x0,
                   const Disturbance& disturbance, const SimConfig& config,
                   const std::optional<SymMatrix>& certificate_H = {}) {
    plant.check();
    config.check();
    const int n = plant.order();
    if (static_cast<int>(x0.size()) != n)
        throw std::invalid_argument("run_state_feedback: x0 dimension mismatch");
    if (certificate_H && certificate_H->order() != n)
        throw std::invalid_argument("run_state_feedback: H order mismatch");
    detail::check_hold_alignment(disturbance.spec(), config.step);
    const Disturbance dist = disturbance.with_seed(config.seed);
    const TransformSpec& transform = law.transform();
    const ConstraintWeights& w = law.weights();

    const double xi0 = law.xi(x0, law.u2_init());
    if (!(transform.funnel.g_lo(0.0) < xi0 && xi0 < transform.funnel.g_hi(0.0)))
        throw std::invalid_argument("run_state_feedback: xi(0) not strictly inside the funnel");

    const size_t dim = static_cast<size_t>(n) + 1 + (config.track_eps_integral ? 1 : 0);
    Vec z(dim, 0.0);
    for (int i = 0; i < n; ++i) z[i] = x0[i];
    z[n] = law.u2_init();

    bool tracking = false; // the oracle state joins at eps_integral_start
    auto maybe_seed_tracker = [&](double t, Vec& state) {
        if (!config.track_eps_integral || tracking) return;
        if (t < config.eps_integral_start - 0.5 * config.step) return;
        Vec x(state.begin(), state.begin() + n);
        state[n + 1] = phi_inv_clamped(transform, law.xi(x, state[n]), t).eps;
        tracking = true;
    };

    double hold_time = 0.0; // major time of the step in flight
    auto deriv = [&](double t, const Vec& state, Vec& out) {
        Vec x(state.begin(), state.begin() + n);
        const double u2 = state[n];
        const double xi = law.xi(x, u2);
        const double eps = phi_inv_clamped(transform, xi, t).eps;
        const double f = dist.value_held(t, hold_time);
        const double du2 = law.u2_derivative(x, u2, eps);
        const double u = law.u1(x) + u2;
        const Vec dx = plant_derivative(plant, x, u, f);
        for (int i = 0; i < n; ++i) out[i] = dx[i];
        out[n] = du2;
        if (config.track_eps_integral) {
            const double xi_dot = 2.0 * dot(law.P1_bar().mat() * x, dx) +
                                  2.0 * w.p3() * (std::abs(u2) + w.delta) * sign_positive(u2) * du2;
            out[n + 1] = tracking ? eps_dot_reference(transform, xi_dot, eps, t) : 0.0;
        }
    };

    Trajectory traj;
    traj.state_dim = n;
    traj.output_case = false;
    traj.has_v2 = certificate_H.has_value();
    ViolationReport report;

    const long steps = static_cast<long>(std::round(config.horizon / config.step));
    traj.points.reserve(static_cast<size_t>(steps / config.record_stride) + 2);

    auto inspect = [&](double t, const Vec& state, bool record) {
        Vec x(state.begin(), state.begin() + n);
        const double u2 = state[n];
        const double xi = law.xi(x, u2);
        const auto inv = phi_inv_clamped(transform, xi, t);
        const double u1v = law.u1(x);
        const double u = u1v + u2;
        const double lo = transform.funnel.g_lo(t), hi = transform.funnel.g_hi(t);
        const double x_level = quad_form(*w.P1, x);
        const double u_level = w.p0 * u * u;

        const bool in_funnel = lo < xi && xi < hi;
        const bool in_x = x_level <= w.l_x.value(t);
        const bool in_u = u_level <= w.l_u.value(t);
        if (!in_funnel) detail::note(report.funnel_exits, report.first_funnel_exit, t);
        if (!in_x) detail::note(report.x_exits, report.first_x_exit, t);
        if (!in_u) detail::note(report.u_exits, report.first_u_exit, t);
        if (inv.clamped) detail::note(report.clamp_events, report.first_clamp, t);
        report.min_funnel_margin = std::min({report.min_funnel_margin, xi - lo, hi - xi});
        report.min_x_margin = std::min(report.min_x_margin, w.l_x.value(t) - x_level);
        report.min_u_margin = std::min(report.min_u_margin, w.l_u.value(t) - u_level);

        if (config.track_eps_integral && tracking)
            traj.max_eps_integral_drift =
                std::max(traj.max_eps_integral_drift, std::abs(inv.eps - state[n + 1]));
        if (!record) return;
        TrajectoryPoint p;
        p.t = t;
        p.x = x;
        p.u1 = u1v;
        p.u2 = u2;
        p.u = u;
        p.xi = xi;
        p.eps = inv.eps;
        p.f = dist(t);
        p.v1 = 0.5 * inv.eps * inv.eps;
        p.v2 = certificate_H ? quad_form(certificate_H->mat(), x) : 0.0;
        if (config.track_eps_integral) p.eps_int = state[n + 1];
        p.in_funnel = in_funnel;
        p.in_x = in_x;
        p.in_u = in_u;
        traj.points.push_back(std::move(p));
    };

    Vec k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    maybe_seed_tracker(0.0, z);
    inspect(0.0, z, true);
    for (long i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * config.step;
        maybe_seed_tracker(t, z);
        hold_time = t;
        detail::rk4_step(deriv, t, config.step, z, k1, k2, k3, k4, tmp);
        bool finite = true;
        for (double v : z) finite = finite && std::isfinite(v);
        const double t_next = static_cast<double>(i + 1) * config.step;
        if (!finite) {
            detail::note(report.nonfinite, report.first_nonfinite, t_next);
            break; // abort with the partial trajectory
        }
        inspect(t_next, z, (i + 1) % config.record_stride == 0 || i + 1 == steps);
    }
    return {std::move(traj), report};
}

// ============================================================================
// Output feedback closed loop (Example 3 shape)
// ============================================================================

inline std::pair<Trajectory, ViolationReport>
run_output_feedback(const OutputPlant& plant, const OutputFeedbackLaw& law, const Vec& x0,
                    const Disturbance& disturbance, const SimConfig& config,
                    const std::optional<SymMatrix>& certificate_H = {}) {
    plant.check();
    config.check();
    const int n = plant.order();
    const int m = law.filter().order();
    if (static_cast<int>(x0.size()) != n)
        throw std::invalid_argument("run_output_feedback: x0 dimension mismatch");
    if (certificate_H && certificate_H->order() != n)
        throw std::invalid_argument("run_output_feedback: H order mismatch");
    detail::check_hold_alignment(disturbance.spec(), config.step);
    const Disturbance dist = disturbance.with_seed(config.seed);
    const TransformSpec& transform = law.transform();
    const ConstraintWeights& w = law.weights();

    const double y0 = plant.output(x0);
    const double xi0 = law.xi(y0, law.u2_init());
    if (!(transform.funnel.g_lo(0.0) < xi0 && xi0 < transform.funnel.g_hi(0.0)))
        throw std::invalid_argument("run_output_feedback: xi(0) not strictly inside the funnel");

    const size_t dim = static_cast<size_t>(n) + 1 + m + (config.track_eps_integral ? 1 : 0);
    Vec z(dim, 0.0);
    for (int i = 0; i < n; ++i) z[i] = x0[i];
    z[n] = law.u2_init();

    bool tracking = false;
    auto maybe_seed_tracker = [&](double t, Vec& state) {
        if (!config.track_eps_integral || tracking) return;
        if (t < config.eps_integral_start - 0.5 * config.step) return;
        Vec x(state.begin(), state.begin() + n);
        state[n + 1 + m] = phi_inv_clamped(transform, law.xi(plant.output(x), state[n]), t).eps;
        tracking = true;
    };

    double hold_time = 0.0;
    auto deriv = [&](double t, const Vec& state, Vec& out) {
        Vec x(state.begin(), state.begin() + n);
        const double u2 = state[n];
        Vec xf(state.begin() + n + 1, state.begin() + n + 1 + m);
        const double y = plant.output(x);
        const double xi = law.xi(y, u2);
        const double eps = phi_inv_clamped(transform, xi, t).eps;
        const double f = dist.value_held(t, hold_time);
        const double wf = law.filter().output(xf, u2);
        const double du2 = law.u2_derivative(y, wf, u2, eps);
        const double u = law.u1(y) + u2;
        const Vec dx = plant_derivative(plant.base, x, u, f);
        const Vec dxf = law.filter().derivative(xf, u2);
        for (int i = 0; i < n; ++i) out[i] = dx[i];
        out[n] = du2;
        for (int i = 0; i < m; ++i) out[n + 1 + i] = dxf[i];
        if (config.track_eps_integral) {
            const double y_dot = (plant.L * Mat::col(dx))(0, 0);
            const double xi_dot = 2.0 * law.p1_bar() * y * y_dot +
                                  2.0 * w.p3() * (std::abs(u2) + w.delta) * sign_positive(u2) * du2;
            out[n + 1 + m] = tracking ? eps_dot_reference(transform, xi_dot, eps, t) : 0.0;
        }
    };

    Trajectory traj;
    traj.state_dim = n;
    traj.output_case = true;
    traj.has_v2 = certificate_H.has_value();
    ViolationReport report;

    const long steps = static_cast<long>(std::round(config.horizon / config.step));
    traj.points.reserve(static_cast<size_t>(steps / config.record_stride) + 2);

    auto inspect = [&](double t, const Vec& state, bool record) {
        Vec x(state.begin(), state.begin() + n);
        const double u2 = state[n];
        const double y = plant.output(x);
        const double xi = law.xi(y, u2);
        const auto inv = phi_inv_clamped(transform, xi, t);
        const double u1v = law.u1(y);
        const double u = u1v + u2;
        const double lo = transform.funnel.g_lo(t), hi = transform.funnel.g_hi(t);
        const double y_level = *w.p1 * y * y;
        const double u_level = w.p0 * u * u;

        const bool in_funnel = lo < xi && xi < hi;
        const bool in_y = y_level <= w.l_x.value(t); // l_x slot carries l_y here
        const bool in_u = u_level <= w.l_u.value(t);
        if (!in_funnel) detail::note(report.funnel_exits, report.first_funnel_exit, t);
        if (!in_y) detail::note(report.x_exits, report.first_x_exit, t);
        if (!in_u) detail::note(report.u_exits, report.first_u_exit, t);
        if (inv.clamped) detail::note(report.clamp_events, report.first_clamp, t);
        report.min_funnel_margin = std::min({report.min_funnel_margin, xi - lo, hi - xi});
        report.min_x_margin = std::min(report.min_x_margin, w.l_x.value(t) - y_level);
        report.min_u_margin = std::min(report.min_u_margin, w.l_u.value(t) - u_level);

        if (config.track_eps_integral && tracking)
            traj.max_eps_integral_drift =
                std::max(traj.max_eps_integral_drift, std::abs(inv.eps - state[n + 1 + m]));
        if (!record) return;
        TrajectoryPoint p;
        p.t = t;
        p.x = x;
        p.y = y;
        p.u1 = u1v;
        p.u2 = u2;
        p.u = u;
        p.xi = xi;
        p.eps = inv.eps;
        p.f = dist(t);
        p.v1 = 0.5 * inv.eps * inv.eps;
        p.v2 = certificate_H ? quad_form(certificate_H->mat(), x) : 0.0;
        if (config.track_eps_integral) p.eps_int = state[n + 1 + m];
        p.in_funnel = in_funnel;
        p.in_x = in_y;
        p.in_u = in_u;
        traj.points.push_back(std::move(p));
    };

    Vec k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    maybe_seed_tracker(0.0, z);
    inspect(0.0, z, true);
    for (long i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * config.step;
        maybe_seed_tracker(t, z);
        hold_time = t;
        detail::rk4_step(deriv, t, config.step, z, k1, k2, k3, k4, tmp);
        bool finite = true;
        for (double v : z) finite = finite && std::isfinite(v);
        const double t_next = static_cast<double>(i + 1) * config.step;
        if (!finite) {
            detail::note(report.nonfinite, report.first_nonfinite, t_next);
            break;
        }
        inspect(t_next, z, (i + 1) % config.record_stride == 0 || i + 1 == steps);
    }
    return {std::move(traj), report};
}

// ============================================================================
// Convergence study
// ============================================================================

struct ConvergenceRow {
    double step = 0.0;
    double error = 0.0;          // vs reference, or vs the next-finer run
    double ratio = 0.0;          // error(previous) / error(this)
    double observed_order = 0.0; // log2 of ratio for halving steps
};

// steps must halve; with a reference terminal state the error column is
// absolute, otherwise successive terminal differences are used.
inline std::vector<ConvergenceRow>
convergence_study(const std::function<Vec(double)>& terminal_state,
                  const std::vector<double>& steps, const std::optional<Vec>& reference = {}) {
    if (steps.size() < 3)
        throw std::invalid_argument("convergence_study: need at least 3 step sizes");
    for (size_t i = 0; i + 1 < steps.size(); ++i)
        if (std::abs(steps[i] / steps[i + 1] - 2.0) > 1e-12)
            throw std::invalid_argument("convergence_study: steps must halve");

    std::vector<Vec> terminals;
    terminals.reserve(steps.size());
    for (double h : steps) terminals.push_back(terminal_state(h));

    auto norm_diff = [](const Vec& a, const Vec& b) {
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(s);
    };

    std::vector<ConvergenceRow> table;
    const size_t n_err = reference ? steps.size() : steps.size() - 1;
    for (size_t i = 0; i < n_err; ++i) {
        ConvergenceRow row;
        row.step = steps[i];
        row.error = reference ? norm_diff(terminals[i], *reference)
                              : norm_diff(terminals[i], terminals[i + 1]);
        if (i > 0 && row.error > 0.0) {
            row.ratio = table[i - 1].error / row.error;
            row.observed_order = std::log2(row.ratio);
        }
        table.push_back(row);
    }
    return table;
}

// RK4 terminal state of x' = A x from x0 over [0, T]; the disturbance-free
// linear benchmark used to exhibit fourth-order convergence.
inline Vec rk4_linear_terminal(const Mat& a, Vec x0, double horizon, double h) {
    const long steps = static_cast<long>(std::round(horizon / h));
    const size_t dim = x0.size();
    Vec k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    auto deriv = [&](double, const Vec& x, Vec& out) {
        const Vec ax = a * x;
        for (size_t i = 0; i < dim; ++i) out[i] = ax[i];
    };
    for (long i = 0; i < steps; ++i)
        detail::rk4_step(deriv, static_cast<double>(i) * h, h, x0, k1, k2, k3, k4, tmp);
    return x0;
}

} // namespace funnelgate
