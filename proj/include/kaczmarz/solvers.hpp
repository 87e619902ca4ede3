#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/rng.hpp"

namespace kaczmarz {

/// Consistent overdetermined system A x = b with an optionally known
/// solution. When x_true is present, consistency ||A x_true - b|| <=
/// 1e-10 ||b|| is enforced at construction.
struct LinearSystem {
    DenseMatrix a;
    Vector b;
    std::optional<Vector> x_true;

    LinearSystem(DenseMatrix a_, Vector b_, std::optional<Vector> x_true_ = std::nullopt)
        : a(std::move(a_)), b(std::move(b_)), x_true(std::move(x_true_)) {
        if (b.size() != a.rows())
            throw dimension_error("LinearSystem: right-hand side length != row count");
        ensure_finite(b, "LinearSystem b");
        if (x_true) {
            if (x_true->size() != a.cols())
                throw dimension_error("LinearSystem: x_true length != column count");
            ensure_finite(*x_true, "LinearSystem x_true");
            Vector ax = matvec(a, *x_true);
            double res = 0.0;
            for (std::size_t i = 0; i < ax.size(); ++i) res += std::norm(ax[i] - b[i]);
            if (std::sqrt(res) > 1e-10 * std::max(norm(b), 1e-300))
                throw parameter_error("LinearSystem: x_true does not solve A x = b");
        }
    }

    std::size_t rows() const { return a.rows(); }
    std::size_t cols() const { return a.cols(); }
};

struct SolverOptions {
    Vector x0;                         // empty = zero vector
    std::uint64_t max_projections = 1'000'000;
    double target_error = 1e-14;
    std::uint64_t trace_stride = 0;    // 0 = solver default (m for Kaczmarz, 1 for CGLS)
    std::optional<double> relaxation;  // used by kaczmarz_relaxed only
    std::uint64_t seed = 0;
};

enum class Termination { reached_tolerance, budget_exhausted };

struct TraceRecord {
    std::uint64_t k;              // projections done (Kaczmarz) or CG iterations
    std::optional<double> error;  // ||x_k - x_true||, when x_true known
    double residual;              // ||A x_k - b||
    double flops;                 // cumulative model flops
};

struct IterateTrace {
    std::vector<TraceRecord> records;
    Termination terminated_by = Termination::budget_exhausted;
    Vector final_iterate;

    /// Projections (or iterations) at the first record with error <= eps;
    /// falls back to the final k when the target was never reached.
    std::uint64_t steps_to_error(double eps) const {
        for (const auto& r : records)
            if (r.error && *r.error <= eps) return r.k;
        return records.empty() ? 0 : records.back().k;
    }

    double flops_to_error(double eps) const {
        for (const auto& r : records)
            if (r.error && *r.error <= eps) return r.flops;
        return records.empty() ? 0.0 : records.back().flops;
    }
};

/// Model cost of one Kaczmarz projection in complex arithmetic:
/// inner product 8n-2, axpy 8n, residual/divide/scale scalar work 10.
inline double kaczmarz_step_flops(std::size_t n) {
    return 16.0 * static_cast<double>(n) + 8.0;
}

/// Model cost of one CGLS iteration: one product with A and one with A*
/// (8mn each), 16m + 16n for the vector recurrences and norm
/// accumulations, plus two scalar divisions.
inline double cgls_iteration_flops(std::size_t m, std::size_t n) {
    const double dm = static_cast<double>(m), dn = static_cast<double>(n);
    return 16.0 * dm * dn + 16.0 * dm + 16.0 * dn + 2.0;
}

/// Projects x onto the hyperplane { y : <a, y> = beta } and relaxes the
/// step by lambda: x + lambda (beta - <a, x>) / ||a||^2 * a. The normal
/// `a` follows the conjugate-linear-first inner product convention.
inline Vector project_row(const Vector& x, const Vector& a, Scalar beta, double lambda) {
    if (x.size() != a.size())
        throw dimension_error("project_row: length mismatch");
    if (!(lambda > 0.0) || !(lambda < 2.0))
        throw parameter_error("project_row: relaxation must be in (0, 2)");
    const double nsq = norm_sq(a);
    if (!(nsq > 0.0))
        throw degenerate_row_error("project_row: zero row", 0);
    const Scalar coeff = lambda * (beta - inner_product(a, x)) / nsq;
    Vector out = x;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += coeff * a[j];
    return out;
}

/// Hyperplane normal of equation i: the conjugate of the stored row, so
/// that <normal, x> = (A x)_i under the conjugate-linear-first convention.
inline Vector row_normal(const DenseMatrix& a, std::size_t i) {
    auto r = a.row(i);
    Vector v(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) v[j] = std::conj(r[j]);
    return v;
}

namespace detail {

// In-place projection against a stored matrix row (the normal is the
// row's conjugate); nsq is the precomputed squared row norm.
inline void project_stored_row(Vector& x, std::span<const Scalar> row, Scalar beta,
                               double lambda, double nsq) {
    Scalar dot(0);
    for (std::size_t j = 0; j < row.size(); ++j) dot += row[j] * x[j];
    const Scalar coeff = lambda * (beta - dot) / nsq;
    for (std::size_t j = 0; j < row.size(); ++j) x[j] += coeff * std::conj(row[j]);
}

inline double residual_norm(const LinearSystem& sys, const Vector& x) {
    Vector ax = matvec(sys.a, x);
    double acc = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) acc += std::norm(ax[i] - sys.b[i]);
    return std::sqrt(acc);
}

inline double error_norm(const Vector& x, const Vector& x_true) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += std::norm(x[j] - x_true[j]);
    return std::sqrt(acc);
}

inline Vector initial_iterate(const LinearSystem& sys, const SolverOptions& opts) {
    if (opts.x0.empty()) return Vector(sys.cols(), Scalar(0));
    if (opts.x0.size() != sys.cols())
        throw dimension_error("solver: x0 length != column count");
    ensure_finite(opts.x0, "solver x0");
    return opts.x0;
}

inline void validate_options(const SolverOptions& opts) {
    if (!(opts.target_error > 0.0))
        throw parameter_error("solver: target_error must be positive");
    if (opts.relaxation && !(*opts.relaxation > 0.0 && *opts.relaxation < 2.0))
        throw parameter_error("solver: relaxation must be in (0, 2)");
}

// Shared projection loop. pick(k, rng) supplies the row for projection k.
// Stopping: error <= target when x_true is known (checked every
// projection), otherwise relative residual <= target (checked at trace
// checkpoints; a full residual is O(mn)). Residuals recorded at
// checkpoints are instrumentation and are not charged to the flop count.
template <typename PickRow>
IterateTrace kaczmarz_loop(const LinearSystem& sys, const SolverOptions& opts,
                           double lambda, PickRow&& pick) {
    validate_options(opts);
    const std::size_t m = sys.rows(), n = sys.cols();

    std::vector<double> norms(m);
    for (std::size_t i = 0; i < m; ++i) {
        norms[i] = row_norm_sq(sys.a, i);
        if (!(norms[i] > 0.0))
            throw degenerate_row_error("kaczmarz: zero row", i);
    }

    const std::uint64_t stride = opts.trace_stride ? opts.trace_stride : m;
    const double step_flops = kaczmarz_step_flops(n);
    const double bnorm = std::max(norm(sys.b), 1e-300);
    RngStream rng(opts.seed);

    Vector x = initial_iterate(sys, opts);
    IterateTrace trace;
    auto record = [&](std::uint64_t k) {
        TraceRecord r;
        r.k = k;
        r.flops = static_cast<double>(k) * step_flops;
        r.residual = residual_norm(sys, x);
        if (sys.x_true) r.error = error_norm(x, *sys.x_true);
        trace.records.push_back(r);
    };

    record(0);
    bool done = false;
    if (sys.x_true && *trace.records.back().error <= opts.target_error) {
        trace.terminated_by = Termination::reached_tolerance;
        done = true;
    } else if (!sys.x_true && trace.records.back().residual <= opts.target_error * bnorm) {
        trace.terminated_by = Termination::reached_tolerance;
        done = true;
    }

    std::uint64_t k = 0;
    while (!done && k < opts.max_projections) {
        const std::size_t i = pick(k, rng);
        project_stored_row(x, sys.a.row(i), sys.b[i], lambda, norms[i]);
        ++k;

        bool stop = false;
        if (sys.x_true) stop = error_norm(x, *sys.x_true) <= opts.target_error;
        const bool at_checkpoint = (k % stride) == 0;
        if (!sys.x_true && at_checkpoint)
            stop = residual_norm(sys, x) <= opts.target_error * bnorm;
        if (stop || at_checkpoint || k == opts.max_projections) {
            record(k);
            if (stop) {
                trace.terminated_by = Termination::reached_tolerance;
                done = true;
            }
        }
    }
    trace.final_iterate = std::move(x);
    return trace;
}

} // namespace detail

/// Classical sweep order: rows 0, 1, ..., m-1, 0, 1, ...
inline IterateTrace kaczmarz_cyclic(const LinearSystem& sys, const SolverOptions& opts) {
    const std::size_t m = sys.rows();
    return detail::kaczmarz_loop(sys, opts, 1.0,
                                 [m](std::uint64_t k, RngStream&) { return k % m; });
}

enum class RowWeighting { squared_norm, uniform };

/// Randomized Kaczmarz. squared_norm draws row j with probability
/// ||a_j||^2 / ||A||_F^2; uniform draws rows equiprobably.
inline IterateTrace kaczmarz_randomized(const LinearSystem& sys, const SolverOptions& opts,
                                        RowWeighting weighting = RowWeighting::squared_norm) {
    WeightedIndexDistribution dist =
        weighting == RowWeighting::squared_norm
            ? build_row_distribution(sys.a)
            : WeightedIndexDistribution(std::vector<double>(sys.rows(), 1.0));
    return detail::kaczmarz_loop(
        sys, opts, 1.0,
        [&dist](std::uint64_t, RngStream& rng) { return sample_index(dist, rng); });
}

/// Randomized Kaczmarz with a constant relaxation parameter. Defaults to
/// the 1 + n/m heuristic when opts.relaxation is not set; lambda = 1
/// reproduces kaczmarz_randomized exactly under the same seed.
inline IterateTrace kaczmarz_relaxed(const LinearSystem& sys, const SolverOptions& opts) {
    const double lambda =
        opts.relaxation.value_or(1.0 + static_cast<double>(sys.cols()) /
                                           static_cast<double>(sys.rows()));
    if (!(lambda > 0.0) || !(lambda < 2.0))
        throw parameter_error("kaczmarz_relaxed: relaxation must be in (0, 2)");
    WeightedIndexDistribution dist = build_row_distribution(sys.a);
    return detail::kaczmarz_loop(
        sys, opts, lambda,
        [&dist](std::uint64_t, RngStream& rng) { return sample_index(dist, rng); });
}

/// Per-iteration observer for cgls; receives the iterate, the residual
/// b - A x, and the normal-equation residual A*(b - A x).
using CglsObserver =
    std::function<void(std::uint64_t iter, const Vector& x, const Vector& r, const Vector& s)>;

/// Conjugate gradient on the normal equations, one product with A and one
/// with A* per iteration; A*A is never formed. opts.max_projections caps
/// whole CG iterations here.
inline IterateTrace cgls(const LinearSystem& sys, const SolverOptions& opts,
                         const CglsObserver& observer = {}) {
    detail::validate_options(opts);
    const std::size_t m = sys.rows(), n = sys.cols();
    const std::uint64_t stride = opts.trace_stride ? opts.trace_stride : 1;
    const double iter_flops = cgls_iteration_flops(m, n);
    const double bnorm = std::max(norm(sys.b), 1e-300);

    Vector x = detail::initial_iterate(sys, opts);
    Vector r(m);
    {
        Vector ax = matvec(sys.a, x);
        for (std::size_t i = 0; i < m; ++i) r[i] = sys.b[i] - ax[i];
    }
    Vector s = adjoint_matvec(sys.a, r);
    Vector p = s;
    double gamma = norm_sq(s);

    IterateTrace trace;
    auto record = [&](std::uint64_t k) {
        TraceRecord rec;
        rec.k = k;
        rec.flops = static_cast<double>(k) * iter_flops;
        rec.residual = norm(r);
        if (sys.x_true) rec.error = detail::error_norm(x, *sys.x_true);
        trace.records.push_back(rec);
    };

    record(0);
    auto reached = [&]() {
        return sys.x_true ? *trace.records.back().error <= opts.target_error
                          : trace.records.back().residual <= opts.target_error * bnorm;
    };
    if (reached()) {
        trace.terminated_by = Termination::reached_tolerance;
        trace.final_iterate = std::move(x);
        return trace;
    }

    std::uint64_t k = 0;
    bool done = false;
    while (!done && k < opts.max_projections) {
        Vector q = matvec(sys.a, p);
        const double qsq = norm_sq(q);
        if (!(qsq > 0.0))
            throw numerical_error("cgls: breakdown, zero direction norm at iteration " +
                                  std::to_string(k));
        const double alpha = gamma / qsq;
        for (std::size_t j = 0; j < n; ++j) x[j] += alpha * p[j];
        for (std::size_t i = 0; i < m; ++i) r[i] -= alpha * q[i];
        s = adjoint_matvec(sys.a, r);
        const double gamma_next = norm_sq(s);
        const double beta = gamma_next / gamma;
        gamma = gamma_next;
        for (std::size_t j = 0; j < n; ++j) p[j] = s[j] + beta * p[j];
        ++k;
        if (observer) observer(k, x, r, s);

        bool stop = sys.x_true
                        ? detail::error_norm(x, *sys.x_true) <= opts.target_error
                        : norm(r) <= opts.target_error * bnorm;
        if (stop || (k % stride) == 0 || k == opts.max_projections) {
            record(k);
            if (stop) {
                trace.terminated_by = Termination::reached_tolerance;
                done = true;
            }
        }
    }
    trace.final_iterate = std::move(x);
    return trace;
}

} // namespace kaczmarz
