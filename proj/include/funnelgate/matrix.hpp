#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <vector>

// Dense linear algebra for the desk-scale problems handled here (order <= 8):
// small row-major matrices, Gaussian elimination, and a cyclic-Jacobi
// eigensolver for symmetric matrices.

namespace funnelgate {

using Vec = std::vector<double>;

class Mat {
  public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, 0.0) {
        if (rows < 0 || cols < 0)
            throw std::invalid_argument("Mat: negative dimension");
    }
    Mat(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = static_cast<int>(rows.size());
        cols_ = rows_ ? static_cast<int>(rows.begin()->size()) : 0;
        a_.reserve(static_cast<size_t>(rows_) * cols_);
        for (const auto& r : rows) {
            if (static_cast<int>(r.size()) != cols_)
                throw std::invalid_argument("Mat: ragged initializer");
            a_.insert(a_.end(), r.begin(), r.end());
        }
    }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat zero(int r, int c) { return Mat(r, c); }
    static Mat diag(const Vec& d) {
        Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
        return m;
    }
    static Mat col(const Vec& v) {
        Mat m(static_cast<int>(v.size()), 1);
        for (size_t i = 0; i < v.size(); ++i) m(static_cast<int>(i), 0) = v[i];
        return m;
    }
    static Mat row(const Vec& v) {
        Mat m(1, static_cast<int>(v.size()));
        for (size_t i = 0; i < v.size(); ++i) m(0, static_cast<int>(i)) = v[i];
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    Mat transpose() const {
        Mat t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Mat operator+(const Mat& o) const { return combined(o, +1.0); }
    Mat operator-(const Mat& o) const { return combined(o, -1.0); }
    Mat operator*(double s) const {
        Mat r = *this;
        for (double& v : r.a_) v *= s;
        return r;
    }
    friend Mat operator*(double s, const Mat& m) { return m * s; }

    Mat operator*(const Mat& o) const {
        if (cols_ != o.rows_) throw std::invalid_argument("Mat: shape mismatch in product");
        Mat r(rows_, o.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const double aik = (*this)(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < o.cols_; ++j) r(i, j) += aik * o(k, j);
            }
        return r;
    }

    bool operator==(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_; }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : a_) s += v * v;
        return std::sqrt(s);
    }
    double max_abs() const {
        double s = 0.0;
        for (double v : a_) s = std::max(s, std::abs(v));
        return s;
    }
    bool finite() const {
        for (double v : a_)
            if (!std::isfinite(v)) return false;
        return true;
    }

  private:
    Mat combined(const Mat& o, double sign) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument("Mat: shape mismatch in sum");
        Mat r = *this;
        for (size_t i = 0; i < a_.size(); ++i) r.a_[i] += sign * o.a_[i];
        return r;
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

inline Vec operator*(const Mat& m, const Vec& v) {
    if (m.cols() != static_cast<int>(v.size()))
        throw std::invalid_argument("Mat: shape mismatch in mat*vec");
    Vec r(m.rows(), 0.0);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r[i] += m(i, j) * v[j];
    return r;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// x' M x
inline double quad_form(const Mat& m, const Vec& x) { return dot(x, m * x); }

// Solves A x = b by Gaussian elimination with partial pivoting.
inline Vec solve_linear(Mat a, Vec b) {
    if (!a.square() || a.rows() != static_cast<int>(b.size()))
        throw std::invalid_argument("solve_linear: shape mismatch");
    const int n = a.rows();
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (a(piv, k) == 0.0) throw std::runtime_error("solve_linear: singular matrix");
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (int i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    Vec x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

inline Mat inverse(const Mat& a) {
    if (!a.square()) throw std::invalid_argument("inverse: not square");
    const int n = a.rows();
    Mat inv(n, n);
    for (int j = 0; j < n; ++j) {
        Vec e(n, 0.0);
        e[j] = 1.0;
        Vec col = solve_linear(a, e);
        for (int i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return inv;
}

// ============================================================================
// SymMatrix: symmetry enforced on build (lower triangle is authoritative)
// ============================================================================

class SymMatrix {
  public:
    explicit SymMatrix(int order) : m_(order, order) {
        if (order < 1) throw std::invalid_argument("SymMatrix: order must be >= 1");
    }

    // Mirrors the lower triangle so that m(i,j) == m(j,i) holds exactly.
    static SymMatrix from_lower(const Mat& m) {
        if (!m.square()) throw std::invalid_argument("SymMatrix: not square");
        SymMatrix s(m.rows());
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j <= i; ++j) {
                s.m_(i, j) = m(i, j);
                s.m_(j, i) = m(i, j);
            }
        return s;
    }

    static SymMatrix identity(int n) { return from_lower(Mat::identity(n)); }

    // 0.5(M + M') projection; entries mirror exactly by construction.
    static SymMatrix symmetric_part(const Mat& m) {
        if (!m.square()) throw std::invalid_argument("SymMatrix: not square");
        SymMatrix s(m.rows());
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j <= i; ++j) {
                const double v = 0.5 * (m(i, j) + m(j, i));
                s.m_(i, j) = v;
                s.m_(j, i) = v;
            }
        return s;
    }

    int order() const { return m_.rows(); }
    double operator()(int i, int j) const { return m_(i, j); }
    void set(int i, int j, double v) {
        m_(i, j) = v;
        m_(j, i) = v;
    }
    const Mat& mat() const { return m_; }

  private:
    Mat m_;
};

// ============================================================================
// Cyclic Jacobi eigensolver for symmetric matrices
// ============================================================================

namespace detail {

inline double off_diag_norm(const Mat& a) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

} // namespace detail

// All eigenvalues, ascending. Cyclic Jacobi rotations; sweeps until the
// off-diagonal Frobenius norm drops below 1e-14 * ||m||. A 100-sweep cap
// signals internal failure (cannot happen for finite symmetric input).
inline std::vector<double> eigenvalues(const SymMatrix& sym) {
    Mat a = sym.mat();
    const int n = a.rows();
    const double scale = a.frobenius_norm();
    const double tol = 1e-14 * (scale > 0.0 ? scale : 1.0);

    int sweep = 0;
    while (detail::off_diag_norm(a) > tol) {
        if (++sweep > 100) throw std::runtime_error("eigenvalues: Jacobi failed to converge");
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a(r, p), arq = a(r, q);
                    a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
                    a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
                }
            }
        }
    }

    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline double max_eigenvalue(const SymMatrix& m) { return eigenvalues(m).back(); }
inline double min_eigenvalue(const SymMatrix& m) { return eigenvalues(m).front(); }

inline bool is_negative_semidefinite(const SymMatrix& m, double tol) {
    if (tol < 0.0) throw std::invalid_argument("is_negative_semidefinite: tol must be >= 0");
    return max_eigenvalue(m) <= tol;
}

inline bool is_positive_definite(const SymMatrix& m, double tol = 1e-10) {
    return min_eigenvalue(m) > tol;
}

} // namespace funnelgate
