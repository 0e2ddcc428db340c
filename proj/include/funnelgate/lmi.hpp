#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "funnelgate/controller.hpp"
#include "funnelgate/matrix.hpp"
#include "funnelgate/plant.hpp"

// Certificates for the closed loop: a scalar block in z = col{eps, f, dPhi/dt}
// handled by the S-procedure at the two disturbance vertices v = +/-f_bar, a
// state block that confines the trajectory to the inner ellipsoid, and the
// two scalar multiplier inequalities tying them to the funnel constants.
//
// verify() is a pure eigenvalue test; search() looks for (alpha, tau, H) but
// never returns a certificate that verify() does not accept.

namespace funnelgate {

inline constexpr double kNsdTol = 1e-10; // max-eigenvalue slack accepted as "<= 0"
inline constexpr double kPdTol = 1e-10;  // min-eigenvalue demanded of H

enum class FeedbackKind { StateFeedback, OutputFeedback };

struct CertificateProblem {
    FeedbackKind kind = FeedbackKind::StateFeedback;
    double delta = 0.0;
    double mu = 0.0;
    double beta = 0.0;
    double c = 0.0;
    double p3 = 0.0;
    double vertex = 0.0;       // f_bar (state) or phi_hat (output)
    double gamma = 0.0;
    double inf_g_hi = 0.0;     // inf over t of the funnel upper bound
    double eps_coupling = 0.0; // D'D (state) or 1 (output): scales the (0,1) entry
    double scalar_denom = 0.0; // lambda_min(P1_bar) (state) or p1_bar (output)
    Mat A_bar;                 // A + BK or A + kBL
    Mat B;                     // n x 1
    Mat D;                     // n x 1
    SymMatrix dominance_target{1}; // P1_bar or p1_bar L'L

    int order() const { return A_bar.rows(); }

    void check() const {
        if (delta <= 0.0 || mu <= 0.0 || beta <= 0.0)
            throw std::invalid_argument("CertificateProblem: delta, mu, beta must be > 0");
        if (c < 0.0 || vertex < 0.0 || gamma < 0.0)
            throw std::invalid_argument("CertificateProblem: c, vertex, gamma must be >= 0");
        if (p3 <= 0.0 || inf_g_hi <= 0.0 || scalar_denom <= 0.0)
            throw std::invalid_argument("CertificateProblem: p3, inf_g, denom must be > 0");
        if (!A_bar.square() || B.rows() != order() || D.rows() != order())
            throw std::invalid_argument("CertificateProblem: shape mismatch");
        if (dominance_target.order() != order())
            throw std::invalid_argument("CertificateProblem: dominance target shape mismatch");
    }

    static CertificateProblem state_feedback(const StatePlant& plant, const StateFeedbackLaw& law,
                                             double beta, double c) {
        CertificateProblem p;
        p.kind = FeedbackKind::StateFeedback;
        p.delta = law.weights().delta;
        p.mu = law.weights().mu;
        p.beta = beta;
        p.c = c;
        p.p3 = law.weights().p3();
        p.vertex = plant.f_bar;
        p.gamma = law.transform().funnel.gamma();
        p.inf_g_hi = law.transform().funnel.inf_upper();
        p.eps_coupling = (plant.D.transpose() * plant.D)(0, 0);
        p.scalar_denom = min_eigenvalue(law.P1_bar());
        p.A_bar = law.A_bar();
        p.B = plant.B;
        p.D = plant.D;
        p.dominance_target = law.P1_bar();
        p.check();
        return p;
    }

    static CertificateProblem output_feedback(const OutputPlant& plant,
                                              const OutputFeedbackLaw& law, double beta, double c) {
        CertificateProblem p;
        p.kind = FeedbackKind::OutputFeedback;
        p.delta = law.weights().delta;
        p.mu = law.weights().mu;
        p.beta = beta;
        p.c = c;
        p.p3 = law.weights().p3();
        p.vertex = plant.phi_hat;
        p.gamma = law.transform().funnel.gamma();
        p.inf_g_hi = law.transform().funnel.inf_upper();
        p.eps_coupling = 1.0;
        p.scalar_denom = law.p1_bar();
        p.A_bar = law.A_bar();
        p.B = plant.base.B;
        p.D = plant.base.D;
        p.dominance_target = SymMatrix::from_lower(law.p1_bar() * plant.L.transpose() * plant.L);
        p.check();
        return p;
    }
};

struct Certificate {
    double alpha = 0.0;
    std::array<double, 5> tau{};
    SymMatrix H{1};

    void check(int order) const {
        if (alpha <= 0.0) throw std::invalid_argument("Certificate: alpha must be > 0");
        for (double t : tau)
            if (t <= 0.0) throw std::invalid_argument("Certificate: every tau must be > 0");
        if (H.order() != order) throw std::invalid_argument("Certificate: H order mismatch");
    }
};

// ============================================================================
// Assembly
// ============================================================================

// [ -alpha + tau1/2   v/(2 mu) * coupling   -1/2 ]
// [        *                -tau2             0  ]   in z = col{eps, f, dPhi/dt}
// [        *                  *             -tau3]
inline SymMatrix assemble_eps_block(const CertificateProblem& problem, const Certificate& cert,
                                    double v) {
    Mat m(3, 3);
    m(0, 0) = -cert.alpha + 0.5 * cert.tau[0];
    m(1, 0) = 0.5 * v / problem.mu * problem.eps_coupling;
    m(2, 0) = -0.5;
    m(1, 1) = -cert.tau[1];
    m(2, 1) = 0.0;
    m(2, 2) = -cert.tau[2];
    return SymMatrix::from_lower(m);
}

// [ A_bar'H + H A_bar + beta H    HB    HD  ]
// [            *                -tau4    0  ]   in s = col{x, u2, f}
// [            *                  *   -tau5 ]
inline SymMatrix assemble_H_block(const CertificateProblem& problem, const Certificate& cert) {
    const int n = problem.order();
    if (cert.H.order() != n) throw std::invalid_argument("assemble_H_block: H order mismatch");
    const Mat& h = cert.H.mat();
    const Mat top = problem.A_bar.transpose() * h + h * problem.A_bar + h * problem.beta;
    const Mat hb = h * problem.B;
    const Mat hd = h * problem.D;

    Mat m(n + 2, n + 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) m(i, j) = 0.5 * (top(i, j) + top(j, i));
    for (int i = 0; i < n; ++i) {
        m(n, i) = hb(i, 0);
        m(n + 1, i) = hd(i, 0);
    }
    m(n, n) = -cert.tau[3];
    m(n + 1, n) = 0.0;
    m(n + 1, n + 1) = -cert.tau[4];
    return SymMatrix::from_lower(m);
}

// c tau1 >= vertex^2 tau2 + gamma^2 tau3
// (inf g / denom) beta >= (inf g / p3) tau4 + vertex^2 tau5
inline double scalar_eps_slack(const CertificateProblem& p, const Certificate& c) {
    return p.c * c.tau[0] - p.vertex * p.vertex * c.tau[1] - p.gamma * p.gamma * c.tau[2];
}
inline double scalar_h_slack(const CertificateProblem& p, const Certificate& c) {
    return p.inf_g_hi / p.scalar_denom * p.beta - p.inf_g_hi / p.p3 * c.tau[3] -
           p.vertex * p.vertex * c.tau[4];
}

inline bool check_scalar_side(const CertificateProblem& p, const Certificate& c) {
    return scalar_eps_slack(p, c) >= 0.0 && scalar_h_slack(p, c) >= 0.0;
}

// H >= P1_bar (state) or H >= p1_bar L'L (output), at tolerance -1e-10
inline bool check_H_dominance(const CertificateProblem& p, const Certificate& c) {
    const SymMatrix diff = SymMatrix::from_lower(c.H.mat() - p.dominance_target.mat());
    return min_eigenvalue(diff) >= -kNsdTol;
}

// ============================================================================
// Verification
// ============================================================================

struct VerifyReport {
    bool feasible = false;
    double eps_block_margin_plus = 0.0;  // max eig at v = +vertex  (feasible: <= 1e-10)
    double eps_block_margin_minus = 0.0; // max eig at v = -vertex
    double h_block_margin = 0.0;         // max eig of the H block
    double scalar_eps_slack = 0.0;       // feasible: >= 0
    double scalar_h_slack = 0.0;
    double dominance_margin = 0.0;       // min eig (H - target)    (feasible: >= -1e-10)
    double h_min_eigenvalue = 0.0;       // feasible: > 1e-10
};

inline VerifyReport verify(const CertificateProblem& problem, const Certificate& cert) {
    problem.check();
    cert.check(problem.order());
    VerifyReport r;
    r.eps_block_margin_plus = max_eigenvalue(assemble_eps_block(problem, cert, problem.vertex));
    r.eps_block_margin_minus = max_eigenvalue(assemble_eps_block(problem, cert, -problem.vertex));
    r.h_block_margin = max_eigenvalue(assemble_H_block(problem, cert));
    r.scalar_eps_slack = scalar_eps_slack(problem, cert);
    r.scalar_h_slack = scalar_h_slack(problem, cert);
    r.dominance_margin =
        min_eigenvalue(SymMatrix::from_lower(cert.H.mat() - problem.dominance_target.mat()));
    r.h_min_eigenvalue = min_eigenvalue(cert.H);
    r.feasible = r.eps_block_margin_plus <= kNsdTol && r.eps_block_margin_minus <= kNsdTol &&
                 r.h_block_margin <= kNsdTol && r.scalar_eps_slack >= 0.0 &&
                 r.scalar_h_slack >= 0.0 && r.dominance_margin >= -kNsdTol &&
                 r.h_min_eigenvalue > kPdTol;
    return r;
}

// ============================================================================
// Lyapunov equation (Kronecker route, n <= 8)
// ============================================================================

// Solves a W + W a' = -c for symmetric W.
inline Mat solve_lyapunov(const Mat& a, const Mat& c) {
    if (!a.square() || !c.square() || a.rows() != c.rows())
        throw std::invalid_argument("solve_lyapunov: shape mismatch");
    const int n = a.rows();
    Mat sys(n * n, n * n);
    Vec rhs(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int row = i * n + j;
            rhs[row] = -c(i, j);
            for (int k = 0; k < n; ++k) {
                sys(row, k * n + j) += a(i, k); // (aW)_ij
                sys(row, i * n + k) += a(j, k); // (Wa')_ij
            }
        }
    const Vec w = solve_linear(sys, rhs);
    Mat out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = w[i * n + j];
    return SymMatrix::symmetric_part(out).mat();
}

// ============================================================================
// Search
// ============================================================================

struct SearchResult {
    std::optional<Certificate> certificate; // empty: budget exhausted, see message
    VerifyReport best_report;               // report for the best candidate seen
    std::string message;

    bool feasible() const { return certificate.has_value(); }
};

namespace detail {

// Deterministic Nelder-Mead minimization; used as the fallback H search.
inline Vec nelder_mead(const std::function<double(const Vec&)>& f, Vec start, double step,
                       int max_iter) {
    const size_t d = start.size();
    std::vector<Vec> simplex(d + 1, start);
    std::vector<double> val(d + 1);
    for (size_t i = 0; i < d; ++i) simplex[i + 1][i] += step;
    for (size_t i = 0; i <= d; ++i) val[i] = f(simplex[i]);

    auto order = [&] {
        for (size_t i = 1; i <= d; ++i)
            for (size_t j = i; j > 0 && val[j] < val[j - 1]; --j) {
                std::swap(val[j], val[j - 1]);
                std::swap(simplex[j], simplex[j - 1]);
            }
    };
    order();
    for (int it = 0; it < max_iter; ++it) {
        Vec centroid(d, 0.0);
        for (size_t i = 0; i < d; ++i)
            for (size_t k = 0; k < d; ++k) centroid[k] += simplex[i][k] / d;
        auto blend = [&](double coef) {
            Vec p(d);
            for (size_t k = 0; k < d; ++k)
                p[k] = centroid[k] + coef * (simplex[d][k] - centroid[k]);
            return p;
        };
        const Vec refl = blend(-1.0);
        const double fr = f(refl);
        if (fr < val[0]) {
            const Vec exp_pt = blend(-2.0);
            const double fe = f(exp_pt);
            simplex[d] = fe < fr ? exp_pt : refl;
            val[d] = std::min(fe, fr);
        } else if (fr < val[d - 1]) {
            simplex[d] = refl;
            val[d] = fr;
        } else {
            const Vec contr = blend(0.5);
            const double fc = f(contr);
            if (fc < val[d]) {
                simplex[d] = contr;
                val[d] = fc;
            } else {
                for (size_t i = 1; i <= d; ++i) {
                    for (size_t k = 0; k < d; ++k)
                        simplex[i][k] = 0.5 * (simplex[i][k] + simplex[0][k]);
                    val[i] = f(simplex[i]);
                }
            }
        }
        order();
        if (std::abs(val[d] - val[0]) < 1e-14) break;
    }
    return simplex[0];
}

inline SymMatrix sym_from_params(const Vec& p, int n) {
    Mat m(n, n);
    size_t idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) m(i, j) = p[idx++];
    return SymMatrix::from_lower(m);
}

inline Vec params_from_sym(const SymMatrix& s) {
    Vec p;
    for (int i = 0; i < s.order(); ++i)
        for (int j = 0; j <= i; ++j) p.push_back(s(i, j));
    return p;
}

} // namespace detail

class CertificateSearch {
  public:
    explicit CertificateSearch(CertificateProblem problem, std::uint64_t seed = 0)
        : p_(std::move(problem)), seed_(seed) {
        p_.check();
    }

    // alpha_hint: verify-at-this-alpha mode. fixed_taus: verification-only
    // tau (H is still searched for via the tau4/tau5 supplied).
    SearchResult run(std::optional<double> alpha_hint = {},
                     std::optional<std::array<double, 5>> fixed_taus = {}) const {
        SearchResult result;
        std::vector<double> alphas;
        if (alpha_hint) {
            alphas.push_back(*alpha_hint);
        } else {
            // geometric sweep 1e-2 .. 1e4, 8 points per decade
            for (double a = 1e-2; a <= 1e4 * (1.0 + 1e-12); a *= std::pow(10.0, 1.0 / 8.0))
                alphas.push_back(a);
        }

        bool have_best = false;
        for (double alpha : alphas) {
            Certificate cand;
            cand.alpha = alpha;
            if (!choose_taus(alpha, fixed_taus, cand)) continue;
            if (!choose_H(cand)) {
                // taus feasible but no H found; keep the diagnostics
                const VerifyReport rep = verify_with_placeholder(cand);
                if (!have_best || better(rep, result.best_report)) {
                    result.best_report = rep;
                    have_best = true;
                }
                continue;
            }
            const VerifyReport rep = verify(p_, cand);
            if (rep.feasible) {
                result.certificate = cand;
                result.best_report = rep;
                result.message = "feasible";
                return result;
            }
            if (!have_best || better(rep, result.best_report)) {
                result.best_report = rep;
                have_best = true;
            }
        }
        result.message = "search budget exhausted without a verified certificate; "
                         "this is not a proof of infeasibility";
        return result;
    }

  private:
    static bool better(const VerifyReport& a, const VerifyReport& b) {
        return worst_violation(a) < worst_violation(b);
    }
    static double worst_violation(const VerifyReport& r) {
        double w = std::max(r.eps_block_margin_plus, r.eps_block_margin_minus);
        w = std::max(w, r.h_block_margin);
        w = std::max(w, -r.scalar_eps_slack);
        w = std::max(w, -r.scalar_h_slack);
        w = std::max(w, -r.dominance_margin);
        return w;
    }

    // The eps block at vertex v is negative semidefinite with tau1 in a closed
    // interval once tau2, tau3 are fixed; the choices below minimize the alpha
    // needed, then take the interval midpoint for margin.
    bool choose_taus(double alpha, const std::optional<std::array<double, 5>>& fixed,
                     Certificate& cand) const {
        if (fixed) {
            cand.tau = *fixed;
            return true;
        }
        const double b = 0.5 * p_.vertex / p_.mu * p_.eps_coupling;
        const double tau2 =
            (p_.vertex > 0.0 && p_.c > 0.0) ? b * std::sqrt(2.0 * p_.c) / p_.vertex : 1.0;
        const double tau3 = (p_.gamma > 0.0 && p_.c > 0.0)
                                ? std::sqrt(2.0 * p_.c) / (2.0 * p_.gamma)
                                : std::max(1.0, 1.0 / alpha);
        const double need = p_.vertex * p_.vertex * tau2 + p_.gamma * p_.gamma * tau3;
        double lo;
        if (p_.c > 0.0)
            lo = need / p_.c;
        else if (need == 0.0)
            lo = 0.0;
        else
            return false; // c = 0 with a positive right side: unsatisfiable
        const double hi = 2.0 * (alpha - b * b / tau2 - 1.0 / (4.0 * tau3));
        if (hi <= lo || hi <= 0.0) return false;
        cand.tau[0] = std::max(0.5 * (lo + hi), 1e-12);
        cand.tau[1] = tau2;
        cand.tau[2] = tau3;
        // tau4/tau5 are resolved by the H search; placeholders keep them positive
        cand.tau[3] = cand.tau[3] > 0.0 ? cand.tau[3] : 1.0;
        cand.tau[4] = cand.tau[4] > 0.0 ? cand.tau[4] : 1.0;
        return true;
    }

    bool dominance_ok(const Mat& w) const {
        if (p_.kind == FeedbackKind::StateFeedback) {
            const Mat target_inv = inverse(p_.dominance_target.mat());
            return max_eigenvalue(SymMatrix::from_lower(w - target_inv)) <= 0.0;
        }
        // H >= p1_bar L'L  <=>  p1_bar L W L' = trace(target W) <= 1  (rank-one
        // target, W = H^{-1})
        const Mat& t = p_.dominance_target.mat();
        double tr = 0.0;
        for (int i = 0; i < t.rows(); ++i)
            for (int j = 0; j < t.cols(); ++j) tr += t(i, j) * w(j, i);
        return tr <= 1.0;
    }

    // Fixed (tau4, tau5): the smallest W obeying the Schur-complement form of
    // the H block solves (A_bar + beta/2 I) W + W (.)' = -(BB'/t4 + DD'/t5).
    // A small ridge keeps the final block strictly negative.
    std::optional<SymMatrix> lyapunov_candidate(double tau4, double tau5) const {
        const int n = p_.order();
        const Mat a_beta = p_.A_bar + Mat::identity(n) * (0.5 * p_.beta);
        if (!is_hurwitz(char_poly(a_beta))) return {};
        Mat c = p_.B * p_.B.transpose() * (1.0 / tau4) + p_.D * p_.D.transpose() * (1.0 / tau5);
        const double ridge = 1e-6 * std::max(1.0, c.max_abs());
        c = c + Mat::identity(n) * ridge;
        Mat w;
        try {
            w = solve_lyapunov(a_beta, c);
        } catch (const std::exception&) {
            return {};
        }
        if (!w.finite() || !is_positive_definite(SymMatrix::from_lower(w), 0.0)) return {};
        if (!dominance_ok(w)) return {};
        return SymMatrix::from_lower(inverse(w));
    }

    bool choose_H(Certificate& cand) const {
        // all but a sliver of the multiplier budget, spent along the
        // (tau4, tau5) line; the sliver keeps the scalar slack positive
        const double rhs = p_.inf_g_hi / p_.scalar_denom * p_.beta * 0.999;
        const double coef4 = p_.inf_g_hi / p_.p3;
        const double coef5 = p_.vertex * p_.vertex;
        for (int step = 1; step <= 49; ++step) {
            const double theta = step / 50.0;
            const double tau4 = theta * rhs / coef4;
            const double tau5 = coef5 > 0.0 ? (1.0 - theta) * rhs / coef5 : 1.0;
            if (tau4 <= 0.0 || tau5 <= 0.0) continue;
            if (auto h = lyapunov_candidate(tau4, tau5)) {
                Certificate trial = cand;
                trial.tau[3] = tau4;
                trial.tau[4] = tau5;
                trial.H = *h;
                if (verify(p_, trial).feasible) {
                    cand = trial;
                    return true;
                }
            }
        }
        return nelder_mead_H(cand, rhs, coef4, coef5);
    }

    // Fallback: minimize the worst certificate violation over the lower
    // triangle of H with seeded random restarts around lambda * P1_bar.
    bool nelder_mead_H(Certificate& cand, double rhs, double coef4, double coef5) const {
        const int n = p_.order();
        const double tau4 = 0.5 * rhs / coef4;
        const double tau5 = coef5 > 0.0 ? 0.5 * rhs / coef5 : 1.0;
        Certificate trial = cand;
        trial.tau[3] = tau4;
        trial.tau[4] = tau5;

        auto objective = [&](const Vec& params) {
            Certificate probe = trial;
            probe.H = detail::sym_from_params(params, n);
            const double hmin = min_eigenvalue(probe.H);
            if (hmin <= 0.0) return 1e6 - hmin;
            const VerifyReport r = verify(p_, probe);
            return std::max({r.eps_block_margin_plus, r.eps_block_margin_minus, r.h_block_margin,
                             -r.dominance_margin, kPdTol - r.h_min_eigenvalue});
        };

        std::uint64_t stream = seed_ ^ 0x5bf03635ULL;
        for (int restart = 0; restart < 8; ++restart) {
            const double lambda = std::pow(2.0, restart % 4); // 1, 2, 4, 8 scans
            SymMatrix start = SymMatrix::from_lower(p_.dominance_target.mat() * lambda +
                                                    Mat::identity(n) * 1e-3);
            Vec params = detail::params_from_sym(start);
            if (restart >= 4) { // perturbed restarts, seeded
                for (double& v : params) {
                    stream = funnelgate::detail::splitmix64(stream);
                    v *= 1.0 + 0.25 * (static_cast<double>(stream >> 11) * 0x1.0p-53 - 0.5);
                }
            }
            const Vec best = detail::nelder_mead(objective, params, 0.1, 400 * n);
            Certificate probe = trial;
            probe.H = detail::sym_from_params(best, n);
            if (min_eigenvalue(probe.H) > 0.0 && verify(p_, probe).feasible) {
                cand = probe;
                return true;
            }
        }
        return false;
    }

    VerifyReport verify_with_placeholder(Certificate cand) const {
        cand.H = SymMatrix::from_lower(p_.dominance_target.mat() +
                                       Mat::identity(p_.order()) * 1e-9);
        return verify(p_, cand);
    }

    CertificateProblem p_;
    std::uint64_t seed_;
};

inline SearchResult search(const CertificateProblem& problem,
                           std::optional<double> alpha_hint = {},
                           std::optional<std::array<double, 5>> fixed_taus = {},
                           std::uint64_t seed = 0) {
    return CertificateSearch(problem, seed).run(alpha_hint, fixed_taus);
}

} // namespace funnelgate
