#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kaczmarz/errors.hpp"

namespace kaczmarz {

using Scalar = std::complex<double>;
using Vector = std::vector<Scalar>;

inline bool is_finite(Scalar z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// Throws if any entry is NaN or infinite.
inline void ensure_finite(const Vector& v, const char* what) {
    for (const Scalar& z : v)
        if (!is_finite(z))
            throw parameter_error(std::string(what) + ": non-finite entry");
}

/// Dense complex matrix, row-major. Entries handed to a constructor are
/// validated to be finite; element writes through operator() are not.
class DenseMatrix {
  public:
    DenseMatrix() : m_(0), n_(0) {}

    DenseMatrix(std::size_t m, std::size_t n, Scalar fill = Scalar(0))
        : m_(m), n_(n), entries_(m * n, fill) {
        if (m == 0 || n == 0)
            throw dimension_error("DenseMatrix: dimensions must be >= 1");
        if (!is_finite(fill))
            throw parameter_error("DenseMatrix: non-finite fill value");
    }

    DenseMatrix(std::size_t m, std::size_t n, Vector entries)
        : m_(m), n_(n), entries_(std::move(entries)) {
        if (m == 0 || n == 0)
            throw dimension_error("DenseMatrix: dimensions must be >= 1");
        if (entries_.size() != m * n)
            throw dimension_error("DenseMatrix: entry count does not match shape");
        ensure_finite(entries_, "DenseMatrix");
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix a(n, n);
        for (std::size_t i = 0; i < n; ++i) a(i, i) = Scalar(1);
        return a;
    }

    static DenseMatrix diagonal(const std::vector<double>& d) {
        DenseMatrix a(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) a(i, i) = Scalar(d[i]);
        return a;
    }

    static DenseMatrix from_rows(const std::vector<Vector>& rows) {
        if (rows.empty())
            throw dimension_error("from_rows: need at least one row");
        DenseMatrix a(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != a.n_)
                throw dimension_error("from_rows: ragged rows");
            for (std::size_t j = 0; j < a.n_; ++j) a(i, j) = rows[i][j];
        }
        ensure_finite(a.entries_, "from_rows");
        return a;
    }

    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }

    Scalar& operator()(std::size_t i, std::size_t j) { return entries_[i * n_ + j]; }
    const Scalar& operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }

    std::span<const Scalar> row(std::size_t i) const {
        if (i >= m_) throw dimension_error("row index out of range");
        return {entries_.data() + i * n_, n_};
    }

    const Vector& entries() const { return entries_; }

  private:
    std::size_t m_, n_;
    Vector entries_;
};

/// Singular values sorted descending; length min(m, n).
struct SingularSpectrum {
    std::vector<double> values;

    double sigma_max() const { return values.front(); }
    double sigma_min() const { return values.back(); }
};

/// Condition numbers of a full-column-rank matrix. `k` is the usual
/// condition number sigma_max/sigma_min, `kappa` the Frobenius-scaled
/// variant ||A||_F / sigma_min.
struct ConditionReport {
    double k;
    double kappa;
    double sigma_min;
    double sigma_max;
    double frobenius;
};

/// Inner product, conjugate-linear in the first argument:
/// <u, v> = sum_j conj(u_j) v_j.
inline Scalar inner_product(const Vector& u, const Vector& v) {
    if (u.size() != v.size())
        throw dimension_error("inner_product: length mismatch");
    Scalar acc(0);
    for (std::size_t j = 0; j < u.size(); ++j) acc += std::conj(u[j]) * v[j];
    return acc;
}

inline Scalar inner_product(std::span<const Scalar> u, std::span<const Scalar> v) {
    if (u.size() != v.size())
        throw dimension_error("inner_product: length mismatch");
    Scalar acc(0);
    for (std::size_t j = 0; j < u.size(); ++j) acc += std::conj(u[j]) * v[j];
    return acc;
}

inline double norm_sq(std::span<const Scalar> v) {
    double acc = 0.0;
    for (const Scalar& z : v) acc += std::norm(z);
    return acc;
}

inline double norm_sq(const Vector& v) { return norm_sq(std::span<const Scalar>(v)); }

inline double norm(const Vector& v) { return std::sqrt(norm_sq(v)); }

/// Squared Euclidean norm of row j.
inline double row_norm_sq(const DenseMatrix& a, std::size_t j) {
    return norm_sq(a.row(j));
}

inline double frobenius_norm_sq(const DenseMatrix& a) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.rows(); ++j) acc += row_norm_sq(a, j);
    return acc;
}

inline Vector matvec(const DenseMatrix& a, const Vector& x) {
    if (x.size() != a.cols())
        throw dimension_error("matvec: dimension mismatch");
    Vector y(a.rows(), Scalar(0));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        Scalar acc(0);
        auto r = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) acc += r[j] * x[j];
        y[i] = acc;
    }
    return y;
}

/// y -> A* y (conjugate transpose action).
inline Vector adjoint_matvec(const DenseMatrix& a, const Vector& y) {
    if (y.size() != a.rows())
        throw dimension_error("adjoint_matvec: dimension mismatch");
    Vector x(a.cols(), Scalar(0));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto r = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) x[j] += std::conj(r[j]) * y[i];
    }
    return x;
}

namespace detail {

// One-sided Jacobi orthogonalization on the columns of `col`, an m x n
// column-major array. Rotations stop once every Gram off-diagonal satisfies
// |<a_p,a_q>| <= tol * ||a_p|| ||a_q||; hard cap on sweeps otherwise.
// On return the singular values are the column norms.
inline std::vector<double> jacobi_column_orthogonalize(std::vector<Scalar>& col,
                                                       std::size_t m, std::size_t n,
                                                       double tol, int max_sweeps) {
    auto column = [&](std::size_t j) { return col.data() + j * m; };

    std::vector<double> csq(n);
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        const Scalar* cj = column(j);
        for (std::size_t i = 0; i < m; ++i) acc += std::norm(cj[i]);
        csq[j] = acc;
    }

    int sweep = 0;
    double worst = 0.0;
    for (; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        worst = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                Scalar* cp = column(p);
                Scalar* cq = column(q);
                Scalar apq(0);
                for (std::size_t i = 0; i < m; ++i) apq += std::conj(cp[i]) * cq[i];
                const double app = csq[p], aqq = csq[q];
                const double off = std::abs(apq);
                const double scale = std::sqrt(app * aqq);
                if (scale > 0.0) worst = std::max(worst, off / scale);
                if (off <= tol * scale || off == 0.0)
                    continue;
                rotated = true;
                // Phase-align the pair so the 2x2 Gram block is real
                // symmetric, then apply the classical Jacobi rotation.
                const Scalar phase = apq / off; // e^{i phi}
                const double tau = (aqq - app) / (2.0 * off);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                const Scalar sp = s * std::conj(phase);
                const Scalar cp_phase = c * std::conj(phase);
                for (std::size_t i = 0; i < m; ++i) {
                    const Scalar vp = cp[i], vq = cq[i];
                    cp[i] = c * vp - sp * vq;
                    cq[i] = s * vp + cp_phase * vq;
                }
                // Exact update of the Gram diagonal under the rotation.
                const double shift = t * off;
                csq[p] = app - shift;
                csq[q] = aqq + shift;
            }
        }
        // The incremental diagonal updates drift; refresh once per sweep.
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            const Scalar* cj = column(j);
            for (std::size_t i = 0; i < m; ++i) acc += std::norm(cj[i]);
            csq[j] = acc;
        }
        if (!rotated) break;
    }
    if (sweep == max_sweeps)
        throw numerical_error(
            "jacobi SVD: no convergence after " + std::to_string(max_sweeps) +
            " sweeps (worst relative off-diagonal " + std::to_string(worst) + ")");

    std::vector<double> sv(n);
    for (std::size_t j = 0; j < n; ++j) sv[j] = std::sqrt(csq[j]);
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    return sv;
}

inline std::vector<Scalar> to_column_major(const DenseMatrix& a, bool conjugate_transpose) {
    const std::size_t m = a.rows(), n = a.cols();
    if (!conjugate_transpose) {
        std::vector<Scalar> col(m * n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) col[j * m + i] = a(i, j);
        return col;
    }
    // A* laid out column-major: column i of A* is conj(row i of A).
    std::vector<Scalar> col(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) col[i * n + j] = std::conj(a(i, j));
    return col;
}

} // namespace detail

/// Singular values via one-sided Jacobi. Tall matrices (m >= 3n) go through
/// the n x n normal matrix A*A, whose Jacobi singular values are the squares
/// of A's; everything else is orthogonalized directly. Desk scale only.
inline SingularSpectrum singular_values(const DenseMatrix& a) {
    constexpr double kTol = 1e-14;
    constexpr int kMaxSweeps = 60;

    std::size_t m = a.rows(), n = a.cols();
    const bool transposed = n > m;
    std::vector<Scalar> col = detail::to_column_major(a, transposed);
    if (transposed) std::swap(m, n);

    std::vector<double> sv;
    if (m >= 3 * n && n > 1) {
        // Normal matrix route: B = A.col^* A.col, Hermitian PSD, n x n.
        std::vector<Scalar> b(n * n);
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p; q < n; ++q) {
                Scalar acc(0);
                const Scalar* cp = col.data() + p * m;
                const Scalar* cq = col.data() + q * m;
                for (std::size_t i = 0; i < m; ++i) acc += std::conj(cp[i]) * cq[i];
                b[q * n + p] = acc;
                b[p * n + q] = std::conj(acc);
            }
        }
        sv = detail::jacobi_column_orthogonalize(b, n, n, kTol, kMaxSweeps);
        for (double& s : sv) s = std::sqrt(s);
    } else {
        sv = detail::jacobi_column_orthogonalize(col, m, n, kTol, kMaxSweeps);
    }

    sv.resize(std::min(a.rows(), a.cols()));
    return SingularSpectrum{std::move(sv)};
}

/// Rank tolerance: sigma_min <= 1e-13 * sigma_max flags rank deficiency.
inline ConditionReport condition_numbers(const DenseMatrix& a) {
    const SingularSpectrum s = singular_values(a);
    const double smax = s.sigma_max();
    const double smin = s.sigma_min();
    if (a.rows() < a.cols() || smin <= 1e-13 * smax)
        throw singular_matrix_error("condition_numbers: matrix is rank-deficient", smin);
    const double fro = std::sqrt(frobenius_norm_sq(a));
    return ConditionReport{smax / smin, fro / smin, smin, smax, fro};
}

} // namespace kaczmarz
