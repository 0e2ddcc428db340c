#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "funnelgate/io.hpp"
#include "funnelgate/scenario.hpp"
#include "funnelgate/sim.hpp"

// Acceptance runner: one numbered criterion per function, each printing a
// single PASS/FAIL line (plus indented details). Run all with no arguments
// or a single criterion by number. Exit code 0 only if everything selected
// passed.

namespace {

using namespace funnelgate;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double uniform(std::uint64_t& state, double lo, double hi) {
    state = detail::splitmix64(state);
    return lo + (hi - lo) * (static_cast<double>(state >> 11) * 0x1.0p-53);
}

// ---------------------------------------------------------------------------
// C1 / C2: certificate search at the quoted levels
// ---------------------------------------------------------------------------

Outcome certificate_criterion(const std::vector<ScenarioConfig>& scenarios, double budget_s) {
    const auto t0 = Clock::now();
    Outcome out;
    out.pass = true;
    std::ostringstream os;
    for (const ScenarioConfig& s : scenarios) {
        const CertifyOutcome res = certify_scenario(s);
        const VerifyReport& r = res.result.best_report;
        const bool margins_ok = res.result.feasible() && r.eps_block_margin_plus <= -1e-10 &&
                                r.eps_block_margin_minus <= -1e-10 && r.h_block_margin <= -1e-10;
        out.pass = out.pass && margins_ok;
        os << "    " << s.name << " @ alpha=" << s.alpha << ": "
           << (res.result.feasible() ? "feasible" : "infeasible")
           << " (eps margins " << r.eps_block_margin_plus << " / " << r.eps_block_margin_minus
           << ", H block " << r.h_block_margin << ", scalar slacks " << r.scalar_eps_slack << " / "
           << r.scalar_h_slack << ")\n";
    }
    const double elapsed = seconds_since(t0);
    os << "    elapsed " << elapsed << " s (budget " << budget_s << " s)";
    out.pass = out.pass && elapsed < budget_s;
    out.detail = os.str();
    return out;
}

Outcome c1_state_feedback_certificate() {
    return certificate_criterion({example2_scenario()}, 10.0);
}

Outcome c2_output_feedback_certificate() {
    return certificate_criterion({example3_scenario(false), example3_scenario(true)}, 10.0);
}

// ---------------------------------------------------------------------------
// C3: containment of the state-feedback run, plus the inner-ellipsoid
//     milestone x'P1_bar x <= inf(g_hi) + 5% for t >= 75 s
// ---------------------------------------------------------------------------

Outcome c3_state_feedback_containment() {
    const auto t0 = Clock::now();
    ScenarioConfig s = example2_scenario();
    s.sim.seed = 1;
    const StateFeedbackLaw law = s.state_law();
    const auto [traj, report] =
        run_state_feedback(s.state_plant(), law, s.x0, Disturbance(s.disturbance), s.sim);

    const double level = s.funnel().inf_upper() * 1.05;
    double worst_tail = 0.0, v1_sup = 0.0;
    for (const auto& p : traj.points) {
        v1_sup = std::max(v1_sup, p.v1);
        if (p.t >= 75.0) worst_tail = std::max(worst_tail, quad_form(law.P1_bar().mat(), p.x));
    }
    const double elapsed = seconds_since(t0);

    Outcome out;
    out.pass = report.funnel_exits == 0 && report.x_exits == 0 && report.u_exits == 0 &&
               worst_tail <= level && elapsed < 30.0;
    std::ostringstream os;
    os << "    funnel/state/input exits " << report.funnel_exits << "/" << report.x_exits << "/"
       << report.u_exits << ", min funnel margin " << report.min_funnel_margin
       << "\n    max x'P1_bar x on t >= 75: " << worst_tail << " (allowed " << level << ")"
       << "\n    sup V1 = " << v1_sup << ", elapsed " << elapsed << " s (budget 30 s)";
    out.detail = os.str();
    return out;
}

// ---------------------------------------------------------------------------
// C4: containment of the output-feedback runs, both funnels, 5 seeds each
// ---------------------------------------------------------------------------

Outcome c4_output_feedback_containment() {
    const auto t0 = Clock::now();
    Outcome out;
    out.pass = true;
    std::ostringstream os;
    for (bool cosine : {false, true}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            ScenarioConfig s = example3_scenario(cosine);
            s.sim.seed = seed;
            const auto [traj, report] = run_output_feedback(s.output_plant(), s.output_law(),
                                                            s.x0, Disturbance(s.disturbance),
                                                            s.sim);
            const bool clear =
                report.funnel_exits == 0 && report.x_exits == 0 && report.u_exits == 0;
            out.pass = out.pass && clear;
            if (!clear || seed == 5)
                os << "    " << s.name << " seed " << seed << ": "
                   << (clear ? "contained" : "VIOLATED") << " (min margin "
                   << report.min_funnel_margin << ")\n";
        }
    }
    const double elapsed = seconds_since(t0);
    os << "    elapsed " << elapsed << " s (budget 60 s)";
    out.pass = out.pass && elapsed < 60.0;
    out.detail = os.str();
    return out;
}

// ---------------------------------------------------------------------------
// C5: exact polynomial derivation of the I/O form
// ---------------------------------------------------------------------------

Outcome c5_exact_polynomials() {
    const Mat a{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {3.0, 5.0, 1.0}};
    const Mat b{{0.0}, {0.0}, {1.0}};
    const Mat l{{1.0, 2.0, 1.0}};
    const IoForm io = derive_io_form(a, b, l, -4.0);

    const bool r_ok = io.R == Polynomial({1.0, 2.0, 1.0});
    const bool q_ok = io.Q == Polynomial({-3.0, -5.0, -1.0, 1.0});
    const bool qb_ok = io.Q_bar == Polynomial({1.0, 3.0, 3.0, 1.0});

    Outcome out;
    out.pass = r_ok && q_ok && qb_ok && io.Q != io.Q_bar;
    std::ostringstream os;
    os << "    R(p) = " << io.R.to_string() << " (exact: " << (r_ok ? "yes" : "NO") << ")"
       << "\n    Q(p) = " << io.Q.to_string() << " (exact: " << (q_ok ? "yes" : "NO") << ")"
       << "\n    Q_bar(p) = " << io.Q_bar.to_string() << " (exact: " << (qb_ok ? "yes" : "NO")
       << ")"
       << "\n    flag: the derived open-loop Q(p) is not (p+1)^3; (p+1)^3 equals the"
       << "\n          closed-loop Q_bar = Q - kR at k = -4, so a listing that shows"
       << "\n          (p+1)^3 for this plant's Q most plausibly denotes Q_bar";
    out.detail = os.str();
    return out;
}

// ---------------------------------------------------------------------------
// C6: randomized transform property suite (1e5 cases)
// ---------------------------------------------------------------------------

Outcome c6_transform_properties() {
    const auto t0 = Clock::now();
    std::vector<FunnelBounds> funnels;
    funnels.emplace_back(BoundCurve::constant(0.01), BoundCurve::exp_offset(0.9, 0.1, -0.1), 1.475);
    funnels.emplace_back(BoundCurve::cos_offset(1.0, 1.05, 0.5), BoundCurve::cos_offset(3.5, 4.5, 0.5),
                         2.25);
    funnels.emplace_back(BoundCurve::exp_offset(4.95, 0.05, -0.1), BoundCurve::exp_offset(7.0, 1.0, -0.1),
                         0.75);
    funnels.emplace_back(BoundCurve::constant(0.05), BoundCurve::constant(2.5), 1.0);
    funnels.emplace_back(BoundCurve::constant(0.2), BoundCurve::cos_offset(0.4, 1.5, 0.25), 0.2);
    funnels.emplace_back(BoundCurve::exp_offset(0.5, 0.3, -0.02), BoundCurve::constant(3.0), 0.1);
    const TransformKind kinds[] = {TransformKind::Rational, TransformKind::TanhHalf,
                                   TransformKind::Arctan};

    std::uint64_t state = 0xacce97ed;
    long cases = 0, failures = 0;
    double worst_roundtrip = 0.0, worst_roundtrip_saturated = 0.0, worst_fd = 0.0;
    while (cases < 100000) {
        const FunnelBounds& funnel = funnels[cases % funnels.size()];
        const TransformSpec spec{kinds[(cases / funnels.size()) % 3], funnel};
        const double t = uniform(state, 0.0, 100.0);
        const double eps = uniform(state, -50.0, 50.0);
        ++cases;

        const double xi = phi(spec, eps, t);
        bool ok = xi > funnel.g_lo(t) && xi < funnel.g_hi(t);
        // monotone pairs, separated enough for double-precision tanh to move
        // and outside its saturated band
        const double eps_hi = eps + uniform(state, 0.5, 5.0);
        if (!(spec.kind == TransformKind::TanhHalf && (eps > 30.0 || eps_hi < -30.0)))
            ok = ok && xi < phi(spec, eps_hi, t);

        // round trip; for the tanh squash past |eps| ~ 14 the distance to
        // the funnel bound drops below what a double-valued xi can resolve
        // to 1e-9, so that band is held to the representation floor instead
        const double eps_mid = uniform(state, -20.0, 20.0);
        const double rt = std::abs(phi_inv(spec, phi(spec, eps_mid, t), t) - eps_mid);
        const bool saturated_band =
            spec.kind == TransformKind::TanhHalf && std::abs(eps_mid) > 14.0;
        if (saturated_band) worst_roundtrip_saturated = std::max(worst_roundtrip_saturated, rt);
        else worst_roundtrip = std::max(worst_roundtrip, rt);
        ok = ok && rt < (saturated_band ? 4e-7 : 1e-9);

        const double h = 1e-6;
        const double fd_eps =
            (phi(spec, eps_mid + h, t) - phi(spec, eps_mid - h, t)) / (2.0 * h);
        const double tc = std::max(t, h);
        const double fd_t = (phi(spec, eps_mid, tc + h) - phi(spec, eps_mid, tc - h)) / (2.0 * h);
        const double err_eps = std::abs(fd_eps - dphi_deps(spec, eps_mid, t));
        const double err_t = std::abs(fd_t - dphi_dt(spec, eps_mid, tc));
        worst_fd = std::max({worst_fd, err_eps, err_t});
        ok = ok && err_eps < 1e-6 && err_t < 1e-6;

        if (!ok) ++failures;
    }
    const double elapsed = seconds_since(t0);

    Outcome out;
    out.pass = failures == 0 && elapsed < 10.0;
    std::ostringstream os;
    os << "    " << cases << " cases, " << failures << " failures"
       << "\n    worst round trip " << worst_roundtrip << " (< 1e-9); in the tanh saturated"
       << "\n    band |eps| > 14: " << worst_roundtrip_saturated
       << " (representation floor, held to < 4e-7)"
       << "\n    worst FD mismatch " << worst_fd << ", elapsed " << elapsed
       << " s (budget 10 s)";
    out.detail = os.str();
    return out;
}

// ---------------------------------------------------------------------------
// C7: eigenvalue NSD decision against the principal-minor oracle
// ---------------------------------------------------------------------------

bool nsd_by_principal_minors(const SymMatrix& m) {
    const int n = m.order();
    const Mat neg = m.mat() * -1.0;
    for (int i = 0; i < n; ++i)
        if (neg(i, i) < 0.0) return false;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (neg(i, i) * neg(j, j) - neg(i, j) * neg(j, i) < 0.0) return false;
    if (n == 3) {
        double det = 0.0;
        for (int c = 0; c < 3; ++c)
            det += neg(0, c) * (neg(1, (c + 1) % 3) * neg(2, (c + 2) % 3) -
                                neg(1, (c + 2) % 3) * neg(2, (c + 1) % 3));
        if (det < 0.0) return false;
    }
    return true;
}

Outcome c7_nsd_oracle_agreement() {
    std::uint64_t state = 0x0ac1e5;
    long checked = 0, disagreements = 0, skipped = 0;
    while (checked < 1000) {
        const int n = checked % 2 == 0 ? 2 : 3;
        Mat m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) m(i, j) = uniform(state, -2.0, 2.0);
        const SymMatrix sym = SymMatrix::from_lower(m);
        if (std::abs(max_eigenvalue(sym)) < 1e-9) {
            ++skipped;
            continue;
        }
        ++checked;
        if (is_negative_semidefinite(sym, 0.0) != nsd_by_principal_minors(sym)) ++disagreements;
    }
    Outcome out;
    out.pass = disagreements == 0;
    std::ostringstream os;
    os << "    " << checked << " matrices (" << skipped << " boundary cases excluded), "
       << disagreements << " disagreements";
    out.detail = os.str();
    return out;
}

// ---------------------------------------------------------------------------
// C8: fourth-order convergence on the disturbance-free linear benchmark
// ---------------------------------------------------------------------------

Outcome c8_integration_order() {
    const Mat a{{0.0, 1.0}, {-1.0, -2.0}};
    const Vec x0{1.0, 1.0};
    const double horizon = 5.0;
    const Vec exact{std::exp(-horizon) * (1.0 + 2.0 * horizon),
                    std::exp(-horizon) * (1.0 - 2.0 * horizon)};
    const auto table = convergence_study(
        [&](double h) { return rk4_linear_terminal(a, x0, horizon, h); },
        {0.1, 0.05, 0.025, 0.0125}, exact);

    Outcome out;
    out.pass = true;
    std::ostringstream os;
    for (size_t i = 1; i < table.size(); ++i) {
        out.pass = out.pass && table[i].ratio > 12.0 && table[i].ratio < 20.0;
        os << "    h " << table[i - 1].step << " -> " << table[i].step << ": error ratio "
           << table[i].ratio << " (order " << table[i].observed_order << ")\n";
    }
    os << "    nominal 16, accepted window [12, 20]";
    out.detail = os.str();
    return out;
}

// ---------------------------------------------------------------------------
// C9: disturbance bound and determinism over 20 seeds
// ---------------------------------------------------------------------------

Outcome c9_disturbance() {
    double worst = 0.0;
    bool deterministic = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        DisturbanceSpec spec;
        spec.seed = seed;
        const Disturbance d1(spec), d2(spec);
        for (double t = 0.0; t <= 100.0; t += 0.001) {
            const double v = d1(t);
            worst = std::max(worst, std::abs(v));
            deterministic = deterministic && v == d2(t);
        }
    }
    Outcome out;
    out.pass = worst <= 0.22 && deterministic;
    std::ostringstream os;
    os << "    max |f| over 20 seeds and 100 s: " << worst << " (bound 0.22)"
       << "\n    identical seeds bitwise identical: " << (deterministic ? "yes" : "NO");
    out.detail = os.str();
    return out;
}

// ---------------------------------------------------------------------------
// C10: algebraic eps against the integral of the eps-dynamics oracle
// ---------------------------------------------------------------------------

Outcome c10_eps_consistency() {
    ScenarioConfig s = example2_scenario();
    s.sim.track_eps_integral = true;
    s.sim.record_stride = 1000;
    const auto [traj, report] =
        run_state_feedback(s.state_plant(), s.state_law(), s.x0, Disturbance(s.disturbance), s.sim);

    // diagnostic: the same integral seeded after the initial sliding phase
    ScenarioConfig tail = s;
    tail.sim.eps_integral_start = 1.0;
    const auto [traj_tail, report_tail] = run_state_feedback(
        tail.state_plant(), tail.state_law(), tail.x0, Disturbance(tail.disturbance), tail.sim);

    Outcome out;
    out.pass = traj.max_eps_integral_drift < 1e-3;
    std::ostringstream os;
    os << "    sup |eps_alg - eps_int| from t = 0: " << traj.max_eps_integral_drift
       << " (required < 1e-3)"
       << "\n    diagnostic, integral seeded at t = 1 s: " << traj_tail.max_eps_integral_drift
       << "\n    the u2 rate law slides at u2 = 0 during the opening transient"
       << "\n    (sign flips until ~0.1 s), where the oracle's xi-rate term is not"
       << "\n    the effective one; once past the sliding phase the two eps tracks"
       << "\n    agree to " << traj_tail.max_eps_integral_drift;
    out.detail = os.str();
    return out;
}

// ---------------------------------------------------------------------------

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "certificate search, state feedback, quoted level", c1_state_feedback_certificate},
        {2, "certificate search, output feedback, quoted level", c2_output_feedback_certificate},
        {3, "containment + inner-ellipsoid milestone, state feedback", c3_state_feedback_containment},
        {4, "containment across funnels and seeds, output feedback", c4_output_feedback_containment},
        {5, "exact polynomial input/output derivation", c5_exact_polynomials},
        {6, "transform property suite", c6_transform_properties},
        {7, "NSD decision vs principal-minor oracle", c7_nsd_oracle_agreement},
        {8, "integration order on the linear benchmark", c8_integration_order},
        {9, "disturbance bound and determinism", c9_disturbance},
        {10, "eps-dynamics cross-check", c10_eps_consistency},
    };
    return all;
}

} // namespace

int main(int argc, char** argv) {
    int selected = 0;
    if (argc > 1) selected = std::atoi(argv[1]);
    bool all_pass = true;
    int ran = 0;
    for (const Criterion& c : criteria()) {
        if (selected != 0 && c.id != selected) continue;
        ++ran;
        const Outcome outcome = c.run();
        std::printf("[%s] C%-2d %s\n%s\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name,
                    outcome.detail.c_str());
        all_pass = all_pass && outcome.pass;
    }
    if (ran == 0) {
        std::fprintf(stderr, "unknown criterion %d (valid: 1..10)\n", selected);
        return 2;
    }
    return all_pass ? 0 : 1;
}
