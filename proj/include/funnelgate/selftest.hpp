#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "funnelgate/controller.hpp"
#include "funnelgate/matrix.hpp"
#include "funnelgate/plant.hpp"
#include "funnelgate/scenario.hpp"
#include "funnelgate/transform.hpp"

// The embedded invariant suite behind `funnelgate selftest`: a handful of
// cross-implementation checks that a fresh build must pass. Output carries
// no timing so identical runs produce identical bytes.

namespace funnelgate {

struct SelfTestOptions {
    std::uint64_t seed = 1;
    // test hook: wrecks one tolerance so the failure path can be exercised
    bool corrupt_tolerance = false;
};

namespace selftest_detail {

struct Rng {
    std::uint64_t state;
    double uniform() { // in [-1, 1)
        state = detail::splitmix64(state);
        return 2.0 * (static_cast<double>(state >> 11) * 0x1.0p-53) - 1.0;
    }
};

// all principal minors of -M nonnegative <=> M negative semidefinite (n <= 3)
inline bool nsd_by_principal_minors(const SymMatrix& m) {
    const int n = m.order();
    Mat neg = m.mat() * -1.0;
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

} // namespace selftest_detail

inline bool run_selftest(std::ostream& os, const SelfTestOptions& options = {}) {
    std::vector<std::pair<std::string, bool>> rows;
    const double roundtrip_tol = options.corrupt_tolerance ? 1e-30 : 1e-9;

    // transform round trips, all three squash choices
    {
        bool ok = true;
        const FunnelBounds funnel(BoundCurve::constant(0.01),
                                  BoundCurve::exp_offset(0.9, 0.1, -0.1), 1.475);
        for (TransformKind kind :
             {TransformKind::Rational, TransformKind::TanhHalf, TransformKind::Arctan}) {
            const TransformSpec spec{kind, funnel};
            // |eps| <= 12 keeps the tanh squash clear of its double-precision
            // saturated band, where xi cannot resolve eps to this tolerance
            for (double eps = -12.0; eps <= 12.0; eps += 0.7) {
                for (double t : {0.0, 1.0, 10.0, 60.0}) {
                    const double xi = phi(spec, eps, t);
                    ok = ok && xi > funnel.g_lo(t) && xi < funnel.g_hi(t);
                    ok = ok && std::abs(phi_inv(spec, xi, t) - eps) < roundtrip_tol;
                }
            }
        }
        rows.emplace_back("transform round trip", ok);
    }

    // eigenvalue NSD decision vs the principal-minor rule
    {
        bool ok = true;
        selftest_detail::Rng rng{options.seed ^ 0x51e21ULL};
        for (int trial = 0; trial < 400; ++trial) {
            const int n = trial % 2 == 0 ? 2 : 3;
            Mat m(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j <= i; ++j) m(i, j) = 2.0 * rng.uniform();
            const SymMatrix sym = SymMatrix::from_lower(m);
            const double margin = max_eigenvalue(sym);
            if (std::abs(margin) < 1e-9) continue; // boundary cases excluded
            ok = ok && (is_negative_semidefinite(sym, 0.0) ==
                        selftest_detail::nsd_by_principal_minors(sym));
        }
        rows.emplace_back("NSD eigen test vs principal minors", ok);
    }

    // realized p R / Q_bar filter against its analytic step response
    {
        const auto scenario = example3_scenario(false);
        const auto law = scenario.output_law();
        const FilterRealization& f = law.filter();
        // step response of 1 - 1/(p+1) is exp(-t)
        Vec xf(f.order(), 0.0);
        const double h = 1e-3;
        bool ok = true;
        Vec k1(xf.size()), k2(xf.size()), k3(xf.size()), k4(xf.size()), tmp(xf.size());
        auto deriv = [&](double, const Vec& x, Vec& out) {
            const Vec dx = f.derivative(x, 1.0);
            for (size_t i = 0; i < dx.size(); ++i) out[i] = dx[i];
        };
        for (long i = 0; i <= 10000; ++i) {
            const double t = i * h;
            ok = ok && std::abs(f.output(xf, 1.0) - std::exp(-t)) < 1e-6;
            detail::rk4_step(deriv, t, h, xf, k1, k2, k3, k4, tmp);
        }
        rows.emplace_back("filter realization vs analytic step response", ok);
    }

    // disturbance bound and determinism
    {
        bool ok = true;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const Disturbance d(DisturbanceSpec{0.1, 1.7, 0.2, 0.3, 0.3, 0.2, seed});
            const Disturbance d2(DisturbanceSpec{0.1, 1.7, 0.2, 0.3, 0.3, 0.2, seed});
            for (double t = 0.0; t <= 100.0; t += 0.01) {
                const double v = d(t);
                ok = ok && std::abs(v) <= 0.22 && v == d2(t);
            }
        }
        rows.emplace_back("disturbance bound and determinism", ok);
    }

    bool all = true;
    for (const auto& [name, ok] : rows) {
        os << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
        all = all && ok;
    }
    os << (all ? "selftest: all checks passed\n" : "selftest: FAILURES present\n");
    return all;
}

} // namespace funnelgate
