#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "funnelgate/io.hpp"
#include "funnelgate/scenario.hpp"

using namespace funnelgate;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "funnelgate_io_test";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream is(path);
    REQUIRE(is);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("scenario JSON round trip", "[scenario_io]") {
    for (const std::string name : {"example2", "example3-exp", "example3-cos"}) {
        const ScenarioConfig original = scenario_by_name(name);
        const json once = scenario_to_json(original);
        const ScenarioConfig back = scenario_from_json(once);
        const json twice = scenario_to_json(back);
        CHECK(once == twice);
        CHECK(back.name == original.name);
        CHECK(back.alpha == original.alpha);
        CHECK(back.x0 == original.x0);
    }
}

TEST_CASE("certificate JSON round trip", "[scenario_io]") {
    const auto outcome = certify_scenario(example3_scenario(false));
    REQUIRE(outcome.result.feasible());
    const Certificate& cert = *outcome.result.certificate;
    const Certificate back = certificate_from_json(certificate_to_json(cert));
    CHECK(back.alpha == cert.alpha);
    CHECK(back.tau == cert.tau);
    CHECK((back.H.mat() - cert.H.mat()).max_abs() == 0.0);
}

TEST_CASE("presets pass their own configuration checks", "[scenario_io]") {
    for (const std::string name : {"example2", "example3-exp", "example3-cos"}) {
        const ScenarioConfig s = scenario_by_name(name);
        CHECK_NOTHROW(s.funnel());
        CHECK(s.funnel_implies_sets(100.0));
        if (s.kind == FeedbackKind::StateFeedback) CHECK_NOTHROW(s.state_law());
        else CHECK_NOTHROW(s.output_law());
    }
    CHECK_THROWS_AS(scenario_by_name("example9"), std::invalid_argument);
}

TEST_CASE("trajectory CSV shape", "[scenario_io]") {
    ScenarioConfig s = example2_scenario();
    s.sim.horizon = 2.0;
    s.sim.record_stride = 5;
    const auto outcome = simulate_scenario(s);
    const auto path = temp_dir() / "trajectory.csv";
    write_trajectory_csv(path.string(), outcome.trajectory);

    std::ifstream is(path);
    REQUIRE(is);
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "t,x1,x2,u1,u2,u,xi,eps,f,V1,V2,in_funnel");
    const auto commas = static_cast<size_t>(std::count(line.begin(), line.end(), ','));

    double prev_t = -1.0;
    size_t rows = 0;
    while (std::getline(is, line)) {
        CHECK(static_cast<size_t>(std::count(line.begin(), line.end(), ',')) == commas);
        const double t = std::stod(line.substr(0, line.find(',')));
        CHECK(t > prev_t);
        prev_t = t;
        ++rows;
    }
    CHECK(rows == outcome.trajectory.points.size());
}

TEST_CASE("violation and certificate reports serialize", "[scenario_io]") {
    ScenarioConfig s = example3_scenario(true);
    s.sim.horizon = 2.0;
    s.sim.record_stride = 10;
    const auto outcome = simulate_scenario(s);

    const json v = violation_report_to_json(outcome.report);
    CHECK(v.at("all_clear").get<bool>());
    CHECK(v.at("funnel_exits").get<long>() == 0);
    CHECK(v.contains("min_funnel_margin"));

    const json r = verify_report_to_json(outcome.certificate_report);
    CHECK(r.at("feasible").get<bool>());
}

TEST_CASE("SVG plots are single self-contained files", "[scenario_io]") {
    ScenarioConfig s = example2_scenario();
    s.sim.horizon = 2.0;
    s.sim.record_stride = 10;
    const auto outcome = simulate_scenario(s);
    const auto dir = temp_dir();

    write_xi_plot((dir / "xi.svg").string(), outcome.trajectory, s.funnel());
    const auto law = s.state_law();
    write_state_phase_plot((dir / "px.svg").string(), outcome.trajectory, *s.weights.P1,
                           law.P1_bar().mat(), s.funnel().g_hi(0.0), s.funnel().inf_upper());
    write_input_phase_plot((dir / "pu.svg").string(), outcome.trajectory, s.weights.p2(),
                           s.weights.p3(), s.weights.delta, s.funnel().g_hi(0.0),
                           s.funnel().inf_upper());

    for (const char* name : {"xi.svg", "px.svg", "pu.svg"}) {
        const std::string svg = slurp(dir / name);
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(svg.find("</svg>") != std::string::npos);
        CHECK(svg.find("href") == std::string::npos); // no external references
        CHECK(svg.find("<polyline") != std::string::npos);
    }
}
