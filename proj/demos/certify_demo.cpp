#include <cstdio>

#include "funnelgate/scenario.hpp"

// Searches a certificate for the output-feedback scenario and prints the
// verified inequality margins.

int main() {
    using namespace funnelgate;
    const ScenarioConfig scenario = example3_scenario(false);
    const CertifyOutcome outcome = certify_scenario(scenario);

    if (!outcome.result.feasible()) {
        std::printf("no certificate: %s\n", outcome.result.message.c_str());
        return 1;
    }
    const Certificate& cert = *outcome.result.certificate;
    std::printf("alpha = %.3f\n", cert.alpha);
    std::printf("tau   = %.4f %.4f %.4f %.4f %.4f\n", cert.tau[0], cert.tau[1], cert.tau[2],
                cert.tau[3], cert.tau[4]);
    const VerifyReport& r = outcome.result.best_report;
    std::printf("eps-block margins: %.3e / %.3e, H-block: %.3e\n", r.eps_block_margin_plus,
                r.eps_block_margin_minus, r.h_block_margin);
    std::printf("H dominance min eig: %.3e, H min eig: %.3e\n", r.dominance_margin,
                r.h_min_eigenvalue);
    return 0;
}
