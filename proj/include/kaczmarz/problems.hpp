#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/rng.hpp"
#include "kaczmarz/solvers.hpp"

namespace kaczmarz {

/// Trigonometric sampling instance: recover the coefficients of a degree-r
/// polynomial from m weighted samples. Row j of the matrix is
/// sqrt(w_j) e^{2 pi i k t_j}, k = -r..r, so its squared norm is n w_j and
/// norm-weighted row sampling picks row j with probability w_j.
struct TrigInstance {
    std::size_t r;
    std::size_t n;  // 2r + 1
    std::size_t m;
    std::vector<double> nodes;
    std::vector<double> weights;
    Vector coefficients;
    LinearSystem system;
};

/// System of repeated orthonormal basis rows on which the expected
/// contraction rate (1 - kappa^-2) per projection is attained exactly.
struct TightnessInstance {
    std::size_t n;
    std::size_t m;
    double kappa;
    std::vector<std::size_t> row_multiplicity;  // rows assigned to each e_j
    LinearSystem system;
};

/// m x n matrix of independent N(0,1) entries (stored complex with zero
/// imaginary parts), solution drawn N(0,1), b = A x_true.
inline LinearSystem gaussian_system(std::size_t m, std::size_t n, RngStream& rng) {
    if (m < n || n == 0)
        throw parameter_error("gaussian_system: need m >= n >= 1");
    DenseMatrix a(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = Scalar(rng.standard_normal());
    Vector x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = Scalar(rng.standard_normal());
    Vector b = matvec(a, x);
    return LinearSystem(std::move(a), std::move(b), std::move(x));
}

/// Uniformly random row subset without replacement; b restricted to the
/// kept rows, x_true carried over. target_m = m yields a row permutation.
inline LinearSystem subsample_rows(const LinearSystem& sys, std::size_t target_m,
                                   RngStream& rng) {
    const std::size_t m = sys.rows();
    if (target_m < sys.cols() || target_m > m)
        throw parameter_error("subsample_rows: target_m out of range [n, m]");
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates: the first target_m entries are the sample.
    for (std::size_t i = 0; i < target_m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(
                                      rng.uniform01() * static_cast<double>(m - i));
        std::swap(idx[i], idx[std::min(j, m - 1)]);
    }
    DenseMatrix a(target_m, sys.cols());
    Vector b(target_m);
    for (std::size_t i = 0; i < target_m; ++i) {
        auto src = sys.a.row(idx[i]);
        for (std::size_t j = 0; j < sys.cols(); ++j) a(i, j) = src[j];
        b[i] = sys.b[idx[i]];
    }
    return LinearSystem(std::move(a), std::move(b), sys.x_true);
}

/// Builds the homogeneous system (b = 0, x_true = 0) of repeated basis
/// rows: e_1 exactly m/kappa^2 times, the rest of e_2..e_n round-robin.
/// Requires m/kappa^2 to be a positive integer and kappa^2 >= n.
inline TightnessInstance tightness_system(std::size_t n, std::size_t m, double kappa) {
    if (n < 1 || m < n)
        throw parameter_error("tightness_system: need m >= n >= 1");
    const double repeats_real = static_cast<double>(m) / (kappa * kappa);
    const auto repeats = static_cast<std::size_t>(std::llround(repeats_real));
    if (repeats < 1 || std::abs(repeats_real - static_cast<double>(repeats)) > 1e-9)
        throw parameter_error("tightness_system: m / kappa^2 must be a positive integer");
    if (kappa * kappa < static_cast<double>(n) - 1e-9)
        throw parameter_error("tightness_system: kappa^2 must be >= n");

    std::vector<std::size_t> multiplicity(n, 0);
    multiplicity[0] = repeats;
    DenseMatrix a(m, n);
    for (std::size_t i = 0; i < repeats; ++i) a(i, 0) = Scalar(1);
    std::size_t axis = 1;
    for (std::size_t i = repeats; i < m; ++i) {
        a(i, axis) = Scalar(1);
        ++multiplicity[axis];
        axis = axis + 1 == n ? 1 : axis + 1;
    }
    for (std::size_t j = 1; j < n; ++j)
        if (multiplicity[j] < repeats)
            throw parameter_error(
                "tightness_system: parameters leave a basis vector under-represented");
    Vector b(m, Scalar(0));
    Vector x_true(n, Scalar(0));
    return TightnessInstance{n, m, kappa, std::move(multiplicity),
                             LinearSystem(std::move(a), std::move(b), std::move(x_true))};
}

namespace detail {

// Householder QR of a real square Gaussian sample; returns the explicit
// orthogonal factor.
inline std::vector<double> random_orthogonal(std::size_t n, RngStream& rng) {
    std::vector<double> g(n * n);
    for (double& v : g) v = rng.standard_normal();
    std::vector<std::vector<double>> reflectors;
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> v(n, 0.0);
        double sigma = 0.0;
        for (std::size_t i = k; i < n; ++i) {
            v[i] = g[i * n + k];
            sigma += v[i] * v[i];
        }
        double alpha = std::sqrt(sigma);
        if (v[k] > 0) alpha = -alpha;
        v[k] -= alpha;
        double vsq = 0.0;
        for (std::size_t i = k; i < n; ++i) vsq += v[i] * v[i];
        if (vsq > 0.0) {
            for (std::size_t j = k; j < n; ++j) {
                double dot = 0.0;
                for (std::size_t i = k; i < n; ++i) dot += v[i] * g[i * n + j];
                const double f = 2.0 * dot / vsq;
                for (std::size_t i = k; i < n; ++i) g[i * n + j] -= f * v[i];
            }
        }
        reflectors.push_back(std::move(v));
    }
    // Q = H_0 H_1 ... H_{n-1} applied to the identity.
    std::vector<double> q(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;
    for (std::size_t k = n; k-- > 0;) {
        const auto& v = reflectors[k];
        double vsq = 0.0;
        for (std::size_t i = k; i < n; ++i) vsq += v[i] * v[i];
        if (!(vsq > 0.0)) continue;
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < n; ++i) dot += v[i] * q[i * n + j];
            const double f = 2.0 * dot / vsq;
            for (std::size_t i = k; i < n; ++i) q[i * n + j] -= f * v[i];
        }
    }
    return q;
}

} // namespace detail

/// Square system with singular values (1, ..., 1, sigma_small), built as
/// U diag V^T from random orthogonal factors; b = A x_true for a Gaussian
/// x_true. CG-type methods resolve the two-cluster spectrum in two steps.
inline LinearSystem clustered_spectrum_system(std::size_t n, double sigma_small,
                                              RngStream& rng) {
    if (n < 2)
        throw parameter_error("clustered_spectrum_system: need n >= 2");
    if (!(sigma_small > 0.0) || !(sigma_small < 1.0))
        throw parameter_error("clustered_spectrum_system: sigma_small must be in (0, 1)");
    const std::vector<double> u = detail::random_orthogonal(n, rng);
    const std::vector<double> v = detail::random_orthogonal(n, rng);
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double d = (k + 1 == n) ? sigma_small : 1.0;
                acc += u[i * n + k] * d * v[j * n + k];
            }
            a(i, j) = Scalar(acc);
        }
    }
    Vector x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = Scalar(rng.standard_normal());
    Vector b = matvec(a, x);
    return LinearSystem(std::move(a), std::move(b), std::move(x));
}

/// m sorted uniform draws from [0, 1); exact duplicates are redrawn.
inline std::vector<double> uniform_sorted_nodes(std::size_t m, RngStream& rng) {
    if (m < 2)
        throw parameter_error("uniform_sorted_nodes: need m >= 2");
    std::vector<double> t(m);
    for (;;) {
        for (double& v : t) v = rng.uniform01();
        std::sort(t.begin(), t.end());
        if (std::adjacent_find(t.begin(), t.end()) == t.end()) return t;
    }
}

/// f(t) = sum_{l=-r}^{r} x_l e^{2 pi i l t} by direct summation;
/// coefficients are indexed l = -r..r.
inline Scalar evaluate_trig_poly(const Vector& coefficients, double t) {
    const std::size_t n = coefficients.size();
    const auto r = static_cast<std::ptrdiff_t>((n - 1) / 2);
    Scalar acc(0);
    for (std::ptrdiff_t l = -r; l <= r; ++l) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(l) * t;
        acc += coefficients[static_cast<std::size_t>(l + r)] *
               Scalar(std::cos(phase), std::sin(phase));
    }
    return acc;
}

/// Largest gap between circularly adjacent nodes, wraparound included.
inline double max_torus_gap(const std::vector<double>& nodes) {
    if (nodes.size() < 2)
        throw parameter_error("max_torus_gap: need at least two nodes");
    double gap = 1.0 - nodes.back() + nodes.front();
    for (std::size_t j = 0; j + 1 < nodes.size(); ++j)
        gap = std::max(gap, nodes[j + 1] - nodes[j]);
    return gap;
}

/// Condition-number certificate for the trigonometric system: if every
/// torus gap is at most delta < 1/(2r), then k(A) <= (1+2 delta r)/(1-2 delta r).
inline double groechenig_bound(double delta, std::size_t r) {
    const double prod = 2.0 * delta * static_cast<double>(r);
    if (!(delta > 0.0) || !(prod < 1.0))
        throw parameter_error("groechenig_bound: requires delta < 1/(2r)");
    return (1.0 + prod) / (1.0 - prod);
}

/// Assembles the weighted sampling system for the given nodes and
/// coefficients. Weights are half the distance between torus neighbors
/// (wraparound closes the circle, so they sum to 1); b_j = sqrt(w_j) f(t_j).
inline TrigInstance trig_system(std::size_t r, const std::vector<double>& nodes,
                                const Vector& coefficients) {
    const std::size_t n = 2 * r + 1;
    const std::size_t m = nodes.size();
    if (coefficients.size() != n)
        throw dimension_error("trig_system: coefficient count must be 2r + 1");
    if (m < n)
        throw parameter_error("trig_system: need at least 2r + 1 nodes");
    for (std::size_t j = 0; j < m; ++j) {
        if (nodes[j] < 0.0 || nodes[j] >= 1.0)
            throw parameter_error("trig_system: nodes must lie in [0, 1)");
        if (j + 1 < m && !(nodes[j] < nodes[j + 1]))
            throw parameter_error("trig_system: nodes must be sorted and distinct");
    }

    std::vector<double> w(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double prev = j == 0 ? nodes[m - 1] - 1.0 : nodes[j - 1];
        const double next = j + 1 == m ? nodes[0] + 1.0 : nodes[j + 1];
        w[j] = 0.5 * (next - prev);
    }

    DenseMatrix a(m, n);
    Vector b(m);
    const auto rr = static_cast<std::ptrdiff_t>(r);
    for (std::size_t j = 0; j < m; ++j) {
        const double sw = std::sqrt(w[j]);
        for (std::ptrdiff_t k = -rr; k <= rr; ++k) {
            const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) * nodes[j];
            a(j, static_cast<std::size_t>(k + rr)) =
                sw * Scalar(std::cos(phase), std::sin(phase));
        }
        b[j] = sw * evaluate_trig_poly(coefficients, nodes[j]);
    }
    return TrigInstance{r,       n, m, nodes, std::move(w), coefficients,
                        LinearSystem(std::move(a), std::move(b), coefficients)};
}

} // namespace kaczmarz
