#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "funnelgate/matrix.hpp"

// Polynomials in the differential operator p, plus the Faddeev-LeVerrier
// recurrence that produces det(pI - A) and L adj(pI - A) B. Integer inputs
// take an exact wide-integer path so coefficient identities such as
// Q - k R == (p+1)^3 can be checked without rounding.

namespace funnelgate {

class Polynomial {
  public:
    Polynomial() : c_{0.0} {}
    explicit Polynomial(std::vector<double> ascending) : c_(std::move(ascending)) {
        if (c_.empty()) c_.push_back(0.0);
        trim();
    }
    static Polynomial constant(double v) { return Polynomial({v}); }
    static Polynomial monomial(int degree, double coeff = 1.0) {
        std::vector<double> c(static_cast<size_t>(degree) + 1, 0.0);
        c.back() = coeff;
        return Polynomial(std::move(c));
    }

    // degree of the zero polynomial is reported as 0 with a zero coefficient
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }
    double coeff(int k) const { return (k >= 0 && k <= degree()) ? c_[k] : 0.0; }
    double leading() const { return c_.back(); }
    const std::vector<double>& coeffs() const { return c_; }

    double eval(double x) const {
        double r = 0.0;
        for (int k = degree(); k >= 0; --k) r = r * x + c_[k];
        return r;
    }
    std::complex<double> eval(std::complex<double> x) const {
        std::complex<double> r = 0.0;
        for (int k = degree(); k >= 0; --k) r = r * x + c_[k];
        return r;
    }

    Polynomial operator+(const Polynomial& o) const { return combined(o, +1.0); }
    Polynomial operator-(const Polynomial& o) const { return combined(o, -1.0); }
    Polynomial operator*(double s) const {
        Polynomial r = *this;
        for (double& v : r.c_) v *= s;
        r.trim();
        return r;
    }
    Polynomial operator*(const Polynomial& o) const {
        std::vector<double> c(c_.size() + o.c_.size() - 1, 0.0);
        for (size_t i = 0; i < c_.size(); ++i)
            for (size_t j = 0; j < o.c_.size(); ++j) c[i + j] += c_[i] * o.c_[j];
        return Polynomial(std::move(c));
    }

    // Multiplication by p (one differentiation of the driven signal).
    Polynomial times_p() const {
        if (is_zero()) return *this;
        std::vector<double> c(c_.size() + 1, 0.0);
        for (size_t i = 0; i < c_.size(); ++i) c[i + 1] = c_[i];
        return Polynomial(std::move(c));
    }

    bool operator==(const Polynomial& o) const { return c_ == o.c_; }

    std::string to_string(const std::string& var = "p") const {
        std::ostringstream os;
        bool first = true;
        for (int k = degree(); k >= 0; --k) {
            const double v = c_[k];
            if (v == 0.0 && !(first && k == 0)) continue;
            if (!first) os << (v < 0 ? " - " : " + ");
            else if (v < 0) os << "-";
            const double av = std::abs(v);
            if (av != 1.0 || k == 0) os << av;
            if (k >= 1) os << var;
            if (k >= 2) os << "^" << k;
            first = false;
        }
        return os.str();
    }

  private:
    Polynomial combined(const Polynomial& o, double sign) const {
        std::vector<double> c(std::max(c_.size(), o.c_.size()), 0.0);
        for (size_t i = 0; i < c.size(); ++i)
            c[i] = (i < c_.size() ? c_[i] : 0.0) + sign * (i < o.c_.size() ? o.c_[i] : 0.0);
        return Polynomial(std::move(c));
    }
    void trim() {
        while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
    }

    std::vector<double> c_; // ascending degree
};

// quotient/remainder of num / den (den nonzero)
inline std::pair<Polynomial, Polynomial> divmod(const Polynomial& num, const Polynomial& den) {
    if (den.is_zero()) throw std::invalid_argument("divmod: division by zero polynomial");
    std::vector<double> r = num.coeffs();
    const int dd = den.degree();
    const double lead = den.leading();
    std::vector<double> q(std::max<size_t>(1, num.degree() >= dd ? num.degree() - dd + 1 : 1), 0.0);
    for (int k = num.degree() - dd; k >= 0; --k) {
        const double f = r[k + dd] / lead;
        q[k] = f;
        if (f == 0.0) continue;
        for (int j = 0; j <= dd; ++j) r[k + j] -= f * den.coeff(j);
    }
    r.resize(std::max<size_t>(1, dd));
    return {Polynomial(std::move(q)), Polynomial(std::move(r))};
}

// ============================================================================
// Routh-Hurwitz: strict left-half-plane test on ascending coefficients
// ============================================================================

inline bool is_hurwitz(const Polynomial& poly) {
    if (poly.is_zero() || poly.degree() == 0) return poly.degree() == 0 && poly.coeff(0) != 0.0;
    const int n = poly.degree();
    // normalize sign so the leading coefficient is positive
    std::vector<double> c(static_cast<size_t>(n) + 1);
    const double s = poly.leading() > 0 ? 1.0 : -1.0;
    for (int k = 0; k <= n; ++k) c[k] = s * poly.coeff(k);
    for (int k = 0; k <= n; ++k)
        if (c[k] <= 0.0) return false; // a necessary condition
    // Routh table, rows built from descending coefficients
    std::vector<double> row0, row1;
    for (int k = n; k >= 0; k -= 2) row0.push_back(c[k]);
    for (int k = n - 1; k >= 0; k -= 2) row1.push_back(c[k]);
    row1.resize(row0.size(), 0.0);
    for (int r = 2; r <= n; ++r) {
        if (row1[0] == 0.0) return false; // singular row: not strictly Hurwitz
        std::vector<double> next(row0.size(), 0.0);
        for (size_t j = 0; j + 1 < row0.size(); ++j)
            next[j] = (row1[0] * row0[j + 1] - row0[0] * row1[j + 1]) / row1[0];
        row0 = row1;
        row1 = next;
        if (row1[0] <= 0.0) return false;
    }
    return true;
}

// ============================================================================
// Faddeev-LeVerrier: characteristic polynomial and L adj(pI - A) B
// ============================================================================

namespace detail {

inline bool integer_entries(const Mat& m, double limit = 1e12) {
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            if (!std::isfinite(v) || std::abs(v) > limit || v != std::floor(v)) return false;
        }
    return true;
}

// exact path: all arithmetic in 128-bit integers, converted at the end
struct FaddeevExact {
    int n;
    std::vector<__int128> a;      // A
    std::vector<__int128> work;   // N_k
    std::vector<double> charpoly; // ascending
    std::vector<std::vector<__int128>> adjugate_terms; // N_0..N_{n-1}

    explicit FaddeevExact(const Mat& m) : n(m.rows()), a(n * n), work(n * n, 0) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a[i * n + j] = static_cast<__int128>(std::llround(m(i, j)));
        std::vector<__int128> c(n + 1, 0);
        c[n] = 1;
        // N_0 = I
        for (int i = 0; i < n; ++i) work[i * n + i] = 1;
        adjugate_terms.push_back(work);
        for (int k = 1; k <= n; ++k) {
            // M = A * N_{k-1}
            std::vector<__int128> m2(n * n, 0);
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < n; ++l) {
                    const __int128 ail = a[i * n + l];
                    if (ail == 0) continue;
                    for (int j = 0; j < n; ++j) m2[i * n + j] += ail * work[l * n + j];
                }
            __int128 tr = 0;
            for (int i = 0; i < n; ++i) tr += m2[i * n + i];
            const __int128 ck = -tr / k; // exact by the recurrence
            c[n - k] = ck;
            // N_k = M + c_{n-k} I
            work = m2;
            for (int i = 0; i < n; ++i) work[i * n + i] += ck;
            if (k < n) adjugate_terms.push_back(work);
        }
        charpoly.resize(n + 1);
        for (int k = 0; k <= n; ++k) charpoly[k] = static_cast<double>(static_cast<long long>(c[k]));
    }
};

} // namespace detail

// Monic characteristic polynomial det(pI - A) via Faddeev-LeVerrier.
// Integer inputs yield exactly representable coefficients.
inline Polynomial char_poly(const Mat& a) {
    if (!a.square()) throw std::invalid_argument("char_poly: matrix not square");
    const int n = a.rows();
    if (n > 8) throw std::invalid_argument("char_poly: order > 8 unsupported");
    if (detail::integer_entries(a)) return Polynomial(detail::FaddeevExact(a).charpoly);

    std::vector<double> c(static_cast<size_t>(n) + 1, 0.0);
    c[n] = 1.0;
    Mat nk = Mat::identity(n);
    for (int k = 1; k <= n; ++k) {
        Mat m = a * nk;
        double tr = 0.0;
        for (int i = 0; i < n; ++i) tr += m(i, i);
        const double ck = -tr / k;
        c[n - k] = ck;
        nk = m + Mat::identity(n) * ck;
    }
    return Polynomial(std::move(c));
}

// Coefficients of L adj(pI - A) B (degree <= n-1): the numerator of the
// input/output map y = (R/Q) u for y = Lx, x' = Ax + Bu.
inline Polynomial numerator_poly(const Mat& a, const Mat& b, const Mat& l) {
    if (!a.square()) throw std::invalid_argument("numerator_poly: A not square");
    const int n = a.rows();
    if (b.rows() != n || b.cols() != 1 || l.rows() != 1 || l.cols() != n)
        throw std::invalid_argument("numerator_poly: expected column B and row L");

    if (detail::integer_entries(a) && detail::integer_entries(b) && detail::integer_entries(l)) {
        detail::FaddeevExact fl(a);
        std::vector<double> r(n, 0.0);
        for (int k = 0; k < n; ++k) {
            __int128 s = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    s += static_cast<__int128>(std::llround(l(0, i))) * fl.adjugate_terms[k][i * n + j] *
                         static_cast<__int128>(std::llround(b(j, 0)));
            r[n - 1 - k] = static_cast<double>(static_cast<long long>(s));
        }
        return Polynomial(std::move(r));
    }

    // adj(pI - A) = sum_k p^{n-1-k} N_k with N_0 = I, N_k = A N_{k-1} + c_{n-k} I
    const Polynomial q = char_poly(a);
    std::vector<double> r(n, 0.0);
    Mat nk = Mat::identity(n);
    for (int k = 0; k < n; ++k) {
        if (k > 0) nk = a * nk + Mat::identity(n) * q.coeff(n - k);
        r[n - 1 - k] = (l * nk * b)(0, 0);
    }
    return Polynomial(std::move(r));
}

} // namespace funnelgate
