#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/rng.hpp"
#include "kaczmarz/solvers.hpp"

namespace kaczmarz {

/// Upper bound on the expected squared error of norm-weighted randomized
/// Kaczmarz after k projections: (1 - kappa^-2)^k * e0_sq.
inline double expected_sq_error_upper_bound(double kappa, std::uint64_t k, double e0_sq) {
    if (!(kappa >= 1.0))
        throw parameter_error("expected_sq_error_upper_bound: kappa must be >= 1");
    if (!(e0_sq >= 0.0))
        throw parameter_error("expected_sq_error_upper_bound: e0_sq must be >= 0");
    return std::pow(1.0 - 1.0 / (kappa * kappa), static_cast<double>(k)) * e0_sq;
}

/// Lower bound attained from an adversarial start: (1 - 2k/kappa^2) * e0_sq.
/// Returned unclamped; it goes negative once k exceeds kappa^2 / 2.
inline double expected_sq_error_lower_bound(double kappa, std::uint64_t k, double e0_sq) {
    if (!(kappa >= 1.0))
        throw parameter_error("expected_sq_error_lower_bound: kappa must be >= 1");
    return (1.0 - 2.0 * static_cast<double>(k) / (kappa * kappa)) * e0_sq;
}

struct IterationEstimate {
    double exact;   // 2 log(eps) / log(1 - kappa^-2)
    double approx;  // 2 kappa^2 log(1/eps)
};

/// Expected projections to contract the error by a factor eps. The exact
/// value solves (1 - kappa^-2)^(k/2) = eps; the approximation tightens as
/// kappa grows.
inline IterationEstimate projections_to_accuracy(double kappa, double eps) {
    if (!(eps > 0.0) || !(eps < 1.0))
        throw parameter_error("projections_to_accuracy: eps must be in (0, 1)");
    if (!(kappa > 1.0))
        throw parameter_error("projections_to_accuracy: kappa must be > 1");
    // log1p avoids the cancellation in log(1 - kappa^-2) for large kappa.
    return {2.0 * std::log(eps) / std::log1p(-1.0 / (kappa * kappa)),
            2.0 * kappa * kappa * std::log(1.0 / eps)};
}

enum class ComplexityFormula { randomized_kaczmarz, cgls };

struct ComplexityEstimate {
    double flops;
    double iterations;
    ComplexityFormula formula;
};

/// Expected cost of randomized Kaczmarz on an n-column Gaussian system
/// with aspect ratio y = n/m: 2 n^2 / (1 - sqrt(y))^2 * log(1/eps) flops.
inline ComplexityEstimate rk_complexity(std::size_t n, double y, double eps) {
    if (!(y > 0.0) || !(y < 1.0))
        throw parameter_error("rk_complexity: y must be in (0, 1)");
    if (!(eps > 0.0) || !(eps < 1.0))
        throw parameter_error("rk_complexity: eps must be in (0, 1)");
    const double dn = static_cast<double>(n);
    const double denom = (1.0 - std::sqrt(y)) * (1.0 - std::sqrt(y));
    const double iters = 2.0 * dn / denom * std::log(1.0 / eps);
    return {dn * iters, iters, ComplexityFormula::randomized_kaczmarz};
}

/// Expected cost of CGLS on the same family:
/// 4 n^2 / (y log(1/y)) * log(2/eps) flops.
inline ComplexityEstimate cgls_complexity(std::size_t n, double y, double eps) {
    if (!(y > 0.0) || !(y < 1.0))
        throw parameter_error("cgls_complexity: y must be in (0, 1)");
    if (!(eps > 0.0) || !(eps < 1.0))
        throw parameter_error("cgls_complexity: eps must be in (0, 1)");
    const double dn = static_cast<double>(n);
    const double logy = std::log(1.0 / y);
    const double iters = 2.0 * std::log(2.0 / eps) / logy;
    return {4.0 * dn * dn / (y * logy) * std::log(2.0 / eps), iters,
            ComplexityFormula::cgls};
}

/// Aspect ratio where the two complexity predictions agree (n cancels).
/// Bisection on (0.01, 0.99), resolved well past 1e-6 so the two formulas
/// also agree to 1e-6 relative at the root; about 1/3 for small eps.
inline double crossover_ratio(double eps) {
    if (!(eps > 0.0) || !(eps < 1.0))
        throw parameter_error("crossover_ratio: eps must be in (0, 1)");
    auto diff = [eps](double y) {
        return rk_complexity(1, y, eps).flops - cgls_complexity(1, y, eps).flops;
    };
    double lo = 0.01, hi = 0.99;
    double flo = diff(lo);
    if (!(flo * diff(hi) < 0.0))
        throw parameter_error("crossover_ratio: no sign change on (0.01, 0.99)");
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (flo * diff(mid) <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = diff(lo);
        }
    }
    return 0.5 * (lo + hi);
}

struct GaussianAsymptotics {
    double k_limit;            // (1 + sqrt(y)) / (1 - sqrt(y))
    double kappa_over_sqrt_n;  // 1 / (1 - sqrt(y))
};

/// Large-n limits of the condition numbers of an m x n standard Gaussian
/// matrix at fixed aspect ratio y = n/m.
inline GaussianAsymptotics gaussian_asymptotics(double y) {
    if (!(y > 0.0) || !(y < 1.0))
        throw parameter_error("gaussian_asymptotics: y must be in (0, 1)");
    const double s = std::sqrt(y);
    return {(1.0 + s) / (1.0 - s), 1.0 / (1.0 - s)};
}

/// Exact E||x_k - x_true||^2 for k = 0..k_max under norm-weighted row
/// sampling, by exhaustive enumeration of all m^k row sequences with their
/// probabilities. Refuses budgets beyond 1e7 sequences.
inline std::vector<double> exact_expected_error(const LinearSystem& sys, const Vector& x0,
                                                std::uint64_t k_max) {
    if (!sys.x_true)
        throw parameter_error("exact_expected_error: system must carry x_true");
    if (x0.size() != sys.cols())
        throw dimension_error("exact_expected_error: x0 length != column count");
    const double m = static_cast<double>(sys.rows());
    if (std::pow(m, static_cast<double>(k_max)) > 1e7)
        throw size_error("exact_expected_error: enumeration budget exceeded (m^k > 1e7)");

    WeightedIndexDistribution dist = build_row_distribution(sys.a);
    std::vector<double> norms(sys.rows());
    for (std::size_t i = 0; i < sys.rows(); ++i) norms[i] = row_norm_sq(sys.a, i);

    std::vector<double> expected(k_max + 1, 0.0);
    const Vector& xt = *sys.x_true;

    // Depth-first over row sequences; each node adds its probability-
    // weighted squared error at its depth.
    auto visit = [&](auto&& self, const Vector& x, double prob, std::uint64_t depth) -> void {
        const double err = detail::error_norm(x, xt);
        expected[depth] += prob * err * err;
        if (depth == k_max) return;
        for (std::size_t i = 0; i < sys.rows(); ++i) {
            Vector next = x;
            detail::project_stored_row(next, sys.a.row(i), sys.b[i], 1.0, norms[i]);
            self(self, next, prob * dist.probability(i), depth + 1);
        }
    };
    visit(visit, x0, 1.0, 0);
    return expected;
}

} // namespace kaczmarz
