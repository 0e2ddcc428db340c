#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "funnelgate/io.hpp"
#include "funnelgate/scenario.hpp"
#include "funnelgate/selftest.hpp"

// funnelgate: certify and reproduce the funnel-constrained control runs.
//
//   funnelgate certify  --scenario example2 [--alpha A] [--tau t1,..,t5]
//   funnelgate simulate --scenario example3-cos --horizon 100 --out out/
//   funnelgate selftest
//
// exit codes: 0 success, 1 infeasible / violations / failed checks,
//             2 configuration errors

namespace {

using namespace funnelgate;

struct CommonArgs {
    std::string scenario = "example2";
    std::string config_path;
    std::optional<double> alpha;
    std::string tau_csv;
    std::optional<double> horizon;
    std::optional<double> step;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    bool no_plots = false;
};

ScenarioConfig load_scenario(const CommonArgs& args) {
    ScenarioConfig s = [&] {
        if (args.scenario == "custom") {
            if (args.config_path.empty())
                throw std::invalid_argument("--scenario custom requires --config <path>");
            std::ifstream is(args.config_path);
            if (!is) throw std::invalid_argument("cannot open config " + args.config_path);
            json j;
            is >> j;
            return scenario_from_json(j);
        }
        return scenario_by_name(args.scenario);
    }();
    if (args.alpha) s.alpha = *args.alpha;
    if (args.horizon) s.sim.horizon = *args.horizon;
    if (args.step) s.sim.step = *args.step;
    if (args.seed) s.sim.seed = *args.seed;
    if (const char* env = std::getenv("FUNNELGATE_SEED")) s.sim.seed = std::stoull(env);
    s.disturbance.seed = s.sim.seed;
    return s;
}

std::optional<std::array<double, 5>> parse_taus(const std::string& csv) {
    if (csv.empty()) return {};
    std::array<double, 5> taus{};
    std::stringstream ss(csv);
    std::string item;
    size_t i = 0;
    while (std::getline(ss, item, ',')) {
        if (i >= 5) throw std::invalid_argument("--tau expects exactly 5 values");
        taus[i++] = std::stod(item);
    }
    if (i != 5) throw std::invalid_argument("--tau expects exactly 5 values");
    return taus;
}

void print_margins(const VerifyReport& r) {
    std::cout << "  eps block @ +vertex : max eig " << r.eps_block_margin_plus << "\n"
              << "  eps block @ -vertex : max eig " << r.eps_block_margin_minus << "\n"
              << "  H block             : max eig " << r.h_block_margin << "\n"
              << "  scalar (eps side)   : slack   " << r.scalar_eps_slack << "\n"
              << "  scalar (H side)     : slack   " << r.scalar_h_slack << "\n"
              << "  H dominance         : min eig " << r.dominance_margin << "\n"
              << "  H positivity        : min eig " << r.h_min_eigenvalue << "\n";
}

int cmd_certify(const CommonArgs& args) {
    const ScenarioConfig s = load_scenario(args);
    const auto taus = parse_taus(args.tau_csv);
    const CertifyOutcome outcome = certify_scenario(s, args.alpha.value_or(s.alpha), taus);

    std::filesystem::create_directories(args.out_dir);
    json j;
    j["scenario"] = s.name;
    j["feasible"] = outcome.result.feasible();
    j["message"] = outcome.result.message;
    j["margins"] = verify_report_to_json(outcome.result.best_report);
    if (outcome.result.certificate)
        j.update(certificate_to_json(*outcome.result.certificate));
    write_json(args.out_dir + "/certificate.json", j);

    if (outcome.result.feasible()) {
        std::cout << "certificate found (alpha = " << outcome.result.certificate->alpha << ")\n";
        print_margins(outcome.result.best_report);
        return 0;
    }
    std::cout << "no certificate: " << outcome.result.message << "\n";
    print_margins(outcome.result.best_report);
    return 1;
}

int cmd_simulate(const CommonArgs& args) {
    const ScenarioConfig s = load_scenario(args);
    const SimulateOutcome outcome = simulate_scenario(s);

    std::filesystem::create_directories(args.out_dir);
    write_trajectory_csv(args.out_dir + "/trajectory.csv", outcome.trajectory);
    write_json(args.out_dir + "/violations.json", violation_report_to_json(outcome.report));

    json cert_json;
    cert_json["scenario"] = s.name;
    cert_json["feasible"] = outcome.certificate_feasible;
    cert_json["margins"] = verify_report_to_json(outcome.certificate_report);
    if (outcome.certificate && outcome.certificate_feasible)
        cert_json.update(certificate_to_json(*outcome.certificate));
    write_json(args.out_dir + "/certificate.json", cert_json);
    if (!outcome.certificate_feasible)
        std::cerr << "warning: no verified certificate for this configuration; "
                     "V2 uses the dominance target\n";

    if (!args.no_plots) {
        const std::string plots = args.out_dir + "/plots";
        std::filesystem::create_directories(plots);
        const FunnelBounds funnel = s.funnel();
        write_xi_plot(plots + "/xi_funnel.svg", outcome.trajectory, funnel);
        if (s.kind == FeedbackKind::StateFeedback) {
            const auto law = s.state_law();
            write_state_phase_plot(plots + "/phase_x.svg", outcome.trajectory, *s.weights.P1,
                                   law.P1_bar().mat(), funnel.g_hi(0.0), funnel.inf_upper());
            write_input_phase_plot(plots + "/phase_u.svg", outcome.trajectory, s.weights.p2(),
                                   s.weights.p3(), s.weights.delta, funnel.g_hi(0.0),
                                   funnel.inf_upper());
        } else {
            const double y_limit = std::sqrt(s.weights.l_x.value(0.0) / *s.weights.p1);
            write_signal_plots(plots, outcome.trajectory, y_limit);
        }
    }

    std::cout << "simulated " << s.name << " for " << s.sim.horizon << " s: "
              << (outcome.report.all_clear() ? "no violations" : "VIOLATIONS") << "\n"
              << "  funnel exits " << outcome.report.funnel_exits << ", set exits "
              << outcome.report.x_exits << ", input exits " << outcome.report.u_exits
              << ", clamps " << outcome.report.clamp_events << "\n"
              << "  min funnel margin " << outcome.report.min_funnel_margin << "\n";
    return outcome.report.all_clear() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"funnel-constrained control: certificates and reproduction runs"};
    app.require_subcommand(1);

    CommonArgs args;
    bool corrupt = false;

    auto add_common = [&](CLI::App* cmd, bool sim_flags) {
        cmd->add_option("--scenario", args.scenario,
                        "example2 | example3-exp | example3-cos | custom");
        cmd->add_option("--config", args.config_path, "config JSON for --scenario custom");
        cmd->add_option("--alpha", args.alpha, "certificate level to verify at");
        cmd->add_option("--tau", args.tau_csv, "fix tau1..tau5 (comma separated)");
        cmd->add_option("--seed", args.seed, "run seed (FUNNELGATE_SEED overrides)");
        cmd->add_option("--out", args.out_dir, "output directory");
        if (sim_flags) {
            cmd->add_option("--horizon", args.horizon, "simulation horizon [s]");
            cmd->add_option("--step", args.step, "integration step [s]");
            cmd->add_flag("--no-plots", args.no_plots, "skip SVG emission");
        }
    };

    CLI::App* certify = app.add_subcommand("certify", "search/verify a certificate");
    add_common(certify, false);
    CLI::App* simulate = app.add_subcommand("simulate", "run the closed loop and export artifacts");
    add_common(simulate, true);
    CLI::App* selftest = app.add_subcommand("selftest", "run the embedded invariant suite");
    selftest->add_flag("--hook-corrupt-tolerance", corrupt)->group(""); // hidden test hook

    CLI11_PARSE(app, argc, argv);

    try {
        if (certify->parsed()) return cmd_certify(args);
        if (simulate->parsed()) return cmd_simulate(args);
        SelfTestOptions options;
        options.corrupt_tolerance = corrupt;
        return run_selftest(std::cout, options) ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
