#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "funnelgate/controller.hpp"
#include "funnelgate/lmi.hpp"
#include "funnelgate/sim.hpp"

// Scenario presets and the JSON configuration document. The two reproduction
// scenarios embed every constant of the source examples so that a run needs
// no manual input; "custom" loads the same schema from a file.

namespace funnelgate {

using nlohmann::json;

struct ScenarioConfig {
    std::string name = "custom";
    FeedbackKind kind = FeedbackKind::StateFeedback;

    // plant
    Mat A, B, D;
    std::optional<Mat> L; // output case
    double f_bar = 0.0;
    double phi_hat = 0.0; // output case vertex
    DisturbanceSpec disturbance;

    // weights + sets
    ConstraintWeights weights;

    // gains
    std::optional<Mat> K; // state case, 1 x n
    double k = 0.0;       // output case

    // funnel + transform
    BoundCurve g_lo = BoundCurve::constant(1.0);
    BoundCurve g_hi = BoundCurve::constant(2.0);
    double gamma = 1.0;
    TransformKind transform_kind = TransformKind::TanhHalf;

    // certificate constants and an optional pre-supplied certificate
    double alpha = 1.0;
    double beta = 0.1;
    double c = 1.0;
    std::optional<Certificate> certificate;

    // run data
    SimConfig sim;
    Vec x0;
    double u2_init = 0.01;

    FunnelBounds funnel() const { return FunnelBounds(g_lo, g_hi, gamma); }
    TransformSpec transform() const { return TransformSpec{transform_kind, funnel()}; }

    StatePlant state_plant() const {
        StatePlant p{A, B, D, f_bar};
        p.check();
        return p;
    }
    OutputPlant output_plant() const {
        if (!L) throw std::invalid_argument("scenario: output plant requires L");
        OutputPlant p{state_plant(), *L, phi_hat};
        p.check();
        return p;
    }
    StateFeedbackLaw state_law() const {
        if (!K) throw std::invalid_argument("scenario: state feedback requires K");
        return StateFeedbackLaw(state_plant(), *K, weights, alpha, transform(), u2_init);
    }
    OutputFeedbackLaw output_law() const {
        return OutputFeedbackLaw(output_plant(), k, weights, alpha, transform(), u2_init);
    }
    CertificateProblem certificate_problem() const {
        if (kind == FeedbackKind::StateFeedback)
            return CertificateProblem::state_feedback(state_plant(), state_law(), beta, c);
        return CertificateProblem::output_feedback(output_plant(), output_law(), beta, c);
    }

    // the funnel ceiling must sit below both set levels for containment of
    // the aggregate to imply containment in the original sets
    bool funnel_implies_sets(double horizon) const {
        const double step = 1e-2;
        for (double t = 0.0; t <= horizon; t += step)
            if (g_hi.value(t) > std::min(weights.l_x.value(t), weights.l_u.value(t)) + 1e-12)
                return false;
        return true;
    }
};

// ============================================================================
// Presets
// ============================================================================

inline ScenarioConfig example2_scenario() {
    ScenarioConfig s;
    s.name = "example2";
    s.kind = FeedbackKind::StateFeedback;
    s.A = Mat{{0.0, 1.0}, {1.0, 2.0}};
    s.B = Mat{{0.0}, {1.0}};
    s.D = Mat{{0.1}, {1.0}};
    s.f_bar = 0.22;
    s.disturbance = DisturbanceSpec{}; // 0.1[square(1.7t) + 0.2 sin(0.3t) + sat(noise)]

    s.weights.P1 = Mat::identity(2) * 0.1;
    s.weights.p0 = 0.1;
    s.weights.r = 0.1; // p2 = 0.11, p3 = 1.1
    s.weights.delta = 0.01;
    s.weights.mu = 0.01;
    s.weights.l_x = BoundCurve::exp_offset(1.0, 0.5, -0.05);
    s.weights.l_u = BoundCurve::constant(1.0);

    s.K = Mat{{-2.0, -4.0}};
    s.g_lo = BoundCurve::constant(0.01);
    s.g_hi = BoundCurve::exp_offset(0.9, 0.1, -0.1);
    s.gamma = 1.475;
    s.transform_kind = TransformKind::TanhHalf;

    s.alpha = 11.6;
    s.beta = 0.1;
    s.c = 1.0;

    s.sim = SimConfig{1e-3, 100.0, 1, 1};
    s.x0 = {-1.0, 1.0};
    s.u2_init = 0.01;
    return s;
}

inline ScenarioConfig example3_scenario(bool cosine_funnel) {
    ScenarioConfig s;
    s.name = cosine_funnel ? "example3-cos" : "example3-exp";
    s.kind = FeedbackKind::OutputFeedback;
    s.A = Mat{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {3.0, 5.0, 1.0}};
    s.B = Mat{{0.0}, {0.0}, {1.0}};
    s.D = Mat{{0.1}, {0.2}, {1.0}};
    s.L = Mat{{1.0, 2.0, 1.0}};
    s.f_bar = 0.22;
    s.phi_hat = 0.22;
    s.disturbance = DisturbanceSpec{};

    s.weights.p1 = 0.1;
    s.weights.p0 = 0.01;
    s.weights.r = 0.01; // p2 = 0.0101, p3 = 1.01
    s.weights.delta = 0.01;
    s.weights.mu = 0.01;
    s.weights.l_x = BoundCurve::constant(8.0); // l_y
    s.weights.l_u = BoundCurve::constant(8.0);

    s.k = -4.0;
    if (cosine_funnel) {
        s.g_lo = BoundCurve::cos_offset(1.0, 1.05, 0.5);
        s.g_hi = BoundCurve::cos_offset(3.5, 4.5, 0.5);
        s.gamma = 2.25; // triangle bound on |dPhi/dt|; the grid audit sees 1.75
    } else {
        s.g_lo = BoundCurve::exp_offset(4.95, 0.05, -0.1);
        s.g_hi = BoundCurve::exp_offset(7.0, 1.0, -0.1);
        s.gamma = 0.75; // |g_hi_dot| peaks at 0.7
    }
    s.transform_kind = TransformKind::TanhHalf;

    s.alpha = 20.2;
    s.beta = 0.1;
    s.c = 1.0;

    s.sim = SimConfig{1e-3, 100.0, 1, 1};
    s.x0 = {1.1, 1.1, 1.1};
    s.u2_init = 0.01;
    return s;
}

inline ScenarioConfig scenario_by_name(const std::string& name) {
    if (name == "example2") return example2_scenario();
    if (name == "example3-exp") return example3_scenario(false);
    if (name == "example3-cos") return example3_scenario(true);
    throw std::invalid_argument("unknown scenario: " + name);
}

// ============================================================================
// JSON serialization
// ============================================================================

namespace cfg {

inline json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline Mat mat_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("config: expected matrix");
    if (!j[0].is_array()) { // flat array: a single row
        Mat m(1, static_cast<int>(j.size()));
        for (size_t i = 0; i < j.size(); ++i) m(0, static_cast<int>(i)) = j[i].get<double>();
        return m;
    }
    Mat m(static_cast<int>(j.size()), static_cast<int>(j[0].size()));
    for (int i = 0; i < m.rows(); ++i) {
        if (static_cast<int>(j[i].size()) != m.cols())
            throw std::invalid_argument("config: ragged matrix");
        for (int jj = 0; jj < m.cols(); ++jj) m(i, jj) = j[i][jj].get<double>();
    }
    return m;
}

inline Mat column_from_json(const json& j) {
    if (j.is_array() && !j.empty() && !j[0].is_array()) {
        Mat m(static_cast<int>(j.size()), 1);
        for (size_t i = 0; i < j.size(); ++i) m(static_cast<int>(i), 0) = j[i].get<double>();
        return m;
    }
    return mat_from_json(j);
}

inline json curve_to_json(const BoundCurve& c) {
    return json{{"family", to_string(c.family)}, {"a", c.a}, {"b", c.b}, {"c", c.c}};
}

inline BoundCurve curve_from_json(const json& j) {
    const std::string fam = j.at("family").get<std::string>();
    BoundCurve c;
    if (fam == "constant") c.family = CurveFamily::Constant;
    else if (fam == "exp_offset") c.family = CurveFamily::ExpOffset;
    else if (fam == "cos_offset") c.family = CurveFamily::CosOffset;
    else throw std::invalid_argument("config: unknown curve family " + fam);
    c.a = j.at("a").get<double>();
    c.b = j.value("b", 0.0);
    c.c = j.value("c", 0.0);
    return c;
}

inline TransformKind transform_from_string(const std::string& s) {
    if (s == "rational") return TransformKind::Rational;
    if (s == "tanh_half") return TransformKind::TanhHalf;
    if (s == "arctan") return TransformKind::Arctan;
    throw std::invalid_argument("config: unknown transform kind " + s);
}

} // namespace cfg

inline json certificate_to_json(const Certificate& cert) {
    json j;
    j["alpha"] = cert.alpha;
    j["tau"] = cert.tau;
    j["H"] = cfg::mat_to_json(cert.H.mat());
    return j;
}

inline Certificate certificate_from_json(const json& j) {
    Certificate cert;
    cert.alpha = j.at("alpha").get<double>();
    const auto& taus = j.at("tau");
    if (taus.size() != 5) throw std::invalid_argument("certificate: expected 5 tau values");
    for (size_t i = 0; i < 5; ++i) cert.tau[i] = taus[i].get<double>();
    cert.H = SymMatrix::from_lower(cfg::mat_from_json(j.at("H")));
    return cert;
}

inline json scenario_to_json(const ScenarioConfig& s) {
    json j;
    j["scenario"] = s.name;
    j["kind"] = s.kind == FeedbackKind::StateFeedback ? "state_feedback" : "output_feedback";

    json plant;
    plant["A"] = cfg::mat_to_json(s.A);
    plant["B"] = cfg::mat_to_json(s.B);
    plant["D"] = cfg::mat_to_json(s.D);
    if (s.L) plant["L"] = cfg::mat_to_json(*s.L);
    plant["f_bar"] = s.f_bar;
    if (s.kind == FeedbackKind::OutputFeedback) plant["phi_hat"] = s.phi_hat;
    plant["disturbance"] = json{{"amplitude", s.disturbance.amplitude},
                                {"square_freq", s.disturbance.square_freq},
                                {"sine_gain", s.disturbance.sine_gain},
                                {"sine_freq", s.disturbance.sine_freq},
                                {"noise_power", s.disturbance.noise_power},
                                {"sample_time", s.disturbance.sample_time},
                                {"seed", s.disturbance.seed}};
    j["plant"] = plant;

    json weights;
    if (s.weights.P1) weights["P1"] = cfg::mat_to_json(*s.weights.P1);
    if (s.weights.p1) weights["p1"] = *s.weights.p1;
    weights["p0"] = s.weights.p0;
    weights["r"] = s.weights.r;
    weights["delta"] = s.weights.delta;
    weights["mu"] = s.weights.mu;
    weights[s.kind == FeedbackKind::StateFeedback ? "l_x" : "l_y"] =
        cfg::curve_to_json(s.weights.l_x);
    weights["l_u"] = cfg::curve_to_json(s.weights.l_u);
    j["weights"] = weights;

    json gains;
    if (s.K) gains["K"] = cfg::mat_to_json(*s.K);
    if (s.kind == FeedbackKind::OutputFeedback) gains["k"] = s.k;
    j["gains"] = gains;

    j["funnel"] = json{{"lower", cfg::curve_to_json(s.g_lo)},
                       {"upper", cfg::curve_to_json(s.g_hi)},
                       {"gamma", s.gamma},
                       {"transform", to_string(s.transform_kind)}};

    json cert;
    cert["alpha"] = s.alpha;
    cert["beta"] = s.beta;
    cert["c"] = s.c;
    if (s.certificate) cert["supplied"] = certificate_to_json(*s.certificate);
    j["certificate"] = cert;

    j["sim"] = json{{"step", s.sim.step},
                    {"horizon", s.sim.horizon},
                    {"record_stride", s.sim.record_stride},
                    {"seed", s.sim.seed},
                    {"x0", s.x0},
                    {"u2_init", s.u2_init}};
    return j;
}

inline ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig s;
    s.name = j.value("scenario", "custom");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "state_feedback") s.kind = FeedbackKind::StateFeedback;
    else if (kind == "output_feedback") s.kind = FeedbackKind::OutputFeedback;
    else throw std::invalid_argument("config: unknown kind " + kind);

    const json& plant = j.at("plant");
    s.A = cfg::mat_from_json(plant.at("A"));
    s.B = cfg::column_from_json(plant.at("B"));
    s.D = cfg::column_from_json(plant.at("D"));
    if (plant.contains("L")) s.L = cfg::mat_from_json(plant.at("L"));
    s.f_bar = plant.at("f_bar").get<double>();
    s.phi_hat = plant.value("phi_hat", s.f_bar);
    if (plant.contains("disturbance")) {
        const json& d = plant.at("disturbance");
        s.disturbance.amplitude = d.value("amplitude", 0.1);
        s.disturbance.square_freq = d.value("square_freq", 1.7);
        s.disturbance.sine_gain = d.value("sine_gain", 0.2);
        s.disturbance.sine_freq = d.value("sine_freq", 0.3);
        s.disturbance.noise_power = d.value("noise_power", 0.3);
        s.disturbance.sample_time = d.value("sample_time", 0.2);
        s.disturbance.seed = d.value("seed", std::uint64_t{0});
    }

    const json& weights = j.at("weights");
    if (weights.contains("P1")) s.weights.P1 = cfg::mat_from_json(weights.at("P1"));
    if (weights.contains("p1")) s.weights.p1 = weights.at("p1").get<double>();
    s.weights.p0 = weights.at("p0").get<double>();
    s.weights.r = weights.at("r").get<double>();
    s.weights.delta = weights.at("delta").get<double>();
    s.weights.mu = weights.at("mu").get<double>();
    const char* set_key = s.kind == FeedbackKind::StateFeedback ? "l_x" : "l_y";
    if (weights.contains(set_key)) s.weights.l_x = cfg::curve_from_json(weights.at(set_key));
    if (weights.contains("l_u")) s.weights.l_u = cfg::curve_from_json(weights.at("l_u"));

    const json& gains = j.at("gains");
    if (gains.contains("K")) s.K = cfg::mat_from_json(gains.at("K"));
    if (gains.contains("k")) s.k = gains.at("k").get<double>();

    const json& funnel = j.at("funnel");
    s.g_lo = cfg::curve_from_json(funnel.at("lower"));
    s.g_hi = cfg::curve_from_json(funnel.at("upper"));
    s.gamma = funnel.at("gamma").get<double>();
    s.transform_kind = cfg::transform_from_string(funnel.value("transform", "tanh_half"));

    if (j.contains("certificate")) {
        const json& cert = j.at("certificate");
        s.alpha = cert.value("alpha", 1.0);
        s.beta = cert.value("beta", 0.1);
        s.c = cert.value("c", 1.0);
        if (cert.contains("supplied")) s.certificate = certificate_from_json(cert.at("supplied"));
    }

    const json& sim = j.at("sim");
    s.sim.step = sim.value("step", 1e-3);
    s.sim.horizon = sim.value("horizon", 100.0);
    s.sim.record_stride = sim.value("record_stride", 1);
    s.sim.seed = sim.value("seed", std::uint64_t{0});
    s.x0 = sim.at("x0").get<Vec>();
    s.u2_init = sim.value("u2_init", 0.01);
    return s;
}

// ============================================================================
// Orchestration shared by the CLI and the test suites
// ============================================================================

struct CertifyOutcome {
    CertificateProblem problem;
    SearchResult result;
};

inline CertifyOutcome certify_scenario(const ScenarioConfig& s,
                                       std::optional<double> alpha_override = {},
                                       std::optional<std::array<double, 5>> taus = {}) {
    CertificateProblem problem = s.certificate_problem();
    const double alpha = alpha_override.value_or(s.alpha);
    SearchResult result = search(problem, alpha, taus, s.sim.seed);
    return CertifyOutcome{std::move(problem), std::move(result)};
}

struct SimulateOutcome {
    Trajectory trajectory;
    ViolationReport report;
    std::optional<Certificate> certificate;
    VerifyReport certificate_report;
    bool certificate_feasible = false;
};

// Runs the closed loop. The certificate (supplied or searched) provides the
// V2 = x'Hx diagnostic; when none verifies, the dominance target stands in
// and the run proceeds with a warning left to the caller.
inline SimulateOutcome simulate_scenario(const ScenarioConfig& s) {
    SimulateOutcome out;
    CertificateProblem problem = s.certificate_problem();
    if (s.certificate) {
        out.certificate = s.certificate;
        out.certificate_report = verify(problem, *s.certificate);
    } else {
        SearchResult found = search(problem, s.alpha, {}, s.sim.seed);
        out.certificate_report = found.best_report;
        if (found.certificate) out.certificate = std::move(found.certificate);
    }
    out.certificate_feasible = out.certificate_report.feasible;

    const SymMatrix h_for_v2 = out.certificate_feasible && out.certificate
                                   ? out.certificate->H
                                   : problem.dominance_target;
    const Disturbance dist(s.disturbance);
    if (s.kind == FeedbackKind::StateFeedback) {
        auto [traj, rep] = run_state_feedback(s.state_plant(), s.state_law(), s.x0, dist, s.sim,
                                              h_for_v2);
        out.trajectory = std::move(traj);
        out.report = rep;
    } else {
        auto [traj, rep] = run_output_feedback(s.output_plant(), s.output_law(), s.x0, dist, s.sim,
                                               h_for_v2);
        out.trajectory = std::move(traj);
        out.report = rep;
    }
    return out;
}

} // namespace funnelgate
