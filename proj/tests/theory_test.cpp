#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kaczmarz/problems.hpp"
#include "kaczmarz/theory.hpp"
#include "test_support.hpp"

using namespace kaczmarz;

TEST(UpperBound, BaseCasesAndFrozenValue) {
    EXPECT_DOUBLE_EQ(expected_sq_error_upper_bound(2.0, 0, 3.5), 3.5);
    // kappa^2 = 8, three steps: (7/8)^3 exactly.
    EXPECT_DOUBLE_EQ(expected_sq_error_upper_bound(std::sqrt(8.0), 3, 1.0), 0.669921875);
    EXPECT_THROW(expected_sq_error_upper_bound(0.5, 1, 1.0), parameter_error);
    EXPECT_THROW(expected_sq_error_upper_bound(2.0, 1, -1.0), parameter_error);
}

TEST(LowerBound, ArithmeticAndUnclamped) {
    EXPECT_DOUBLE_EQ(expected_sq_error_lower_bound(10.0, 0, 2.0), 2.0);
    EXPECT_DOUBLE_EQ(expected_sq_error_lower_bound(10.0, 25, 1.0), 0.5);
    EXPECT_LT(expected_sq_error_lower_bound(10.0, 80, 1.0), 0.0);
}

TEST(BoundOrdering, LowerNeverExceedsUpper) {
    for (double kappa : {1.5, 3.0, 10.0, 40.0}) {
        const double half_k2 = kappa * kappa / 2.0;
        for (std::uint64_t k = 0; k <= static_cast<std::uint64_t>(half_k2); ++k) {
            const double up = expected_sq_error_upper_bound(kappa, k, 1.0);
            const double lo = expected_sq_error_lower_bound(kappa, k, 1.0);
            EXPECT_LE(lo, up + 1e-12) << "kappa=" << kappa << " k=" << k;
            EXPECT_GE(lo, -1e-12);
            EXPECT_LE(up, 1.0 + 1e-12);
        }
    }
}

TEST(ProjectionsToAccuracy, FrozenReference) {
    const IterationEstimate est = projections_to_accuracy(10.0, 0.1);
    EXPECT_NEAR(est.exact, 458.21057655338891, 1e-9);
    EXPECT_NEAR(est.approx, 460.51701859880914, 1e-9);
    EXPECT_THROW(projections_to_accuracy(10.0, 1.5), parameter_error);
    EXPECT_THROW(projections_to_accuracy(0.9, 0.1), parameter_error);
}

TEST(ProjectionsToAccuracy, VanishesAsEpsApproachesOne) {
    const IterationEstimate est = projections_to_accuracy(10.0, 0.999999);
    EXPECT_NEAR(est.exact, 0.0, 1e-3);
    EXPECT_NEAR(est.approx, 0.0, 1e-3);
}

TEST(ProjectionsToAccuracy, CeilSatisfiesAccuracyDefinition) {
    for (double kappa : {2.0, 5.0, 20.0}) {
        for (double eps : {0.5, 1e-3, 1e-10}) {
            const IterationEstimate est = projections_to_accuracy(kappa, eps);
            const auto k = static_cast<std::uint64_t>(std::ceil(est.exact));
            EXPECT_LE(expected_sq_error_upper_bound(kappa, k, 1.0), eps * eps * (1.0 + 1e-9));
            // Approximation from above, tightening as kappa grows.
            EXPECT_LE(est.exact, est.approx * (1.0 + 1.0 / (kappa * kappa)));
        }
    }
}

TEST(RkComplexity, FrozenReferenceAndScaling) {
    const ComplexityEstimate c = rk_complexity(100, 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(c.flops, 3609213.1134378844, 1e-4);
    EXPECT_NEAR(c.iterations, 36092.131134378844, 1e-6);
    EXPECT_EQ(c.formula, ComplexityFormula::randomized_kaczmarz);

    // y -> 0 limit: 2 n^2 log(1/eps).
    const ComplexityEstimate small = rk_complexity(50, 1e-12, 1e-6);
    EXPECT_NEAR(small.flops, 2.0 * 2500.0 * std::log(1e6), 1e-3 * small.flops);

    // n^2 scaling.
    const double f1 = rk_complexity(100, 0.25, 1e-8).flops;
    const double f2 = rk_complexity(200, 0.25, 1e-8).flops;
    EXPECT_NEAR(f2 / f1, 4.0, 1e-12);
    EXPECT_THROW(rk_complexity(10, 1.5, 0.1), parameter_error);
}

TEST(CglsComplexity, FrozenReferenceAndOptimalRatio) {
    const ComplexityEstimate c = cgls_complexity(100, 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(c.flops, 3596829.0712347410, 1e-4);
    EXPECT_NEAR(c.iterations, 59.947151187245684, 1e-9);

    // Minimizer over a fine grid sits at y = 1/e, where the cost is
    // 4 e n^2 log(2/eps).
    double best_y = 0.0, best = 1e300;
    for (int i = 1; i < 10000; ++i) {
        const double y = i * 1e-4;
        const double f = cgls_complexity(100, y, 1e-14).flops;
        if (f < best) {
            best = f;
            best_y = y;
        }
    }
    EXPECT_NEAR(best_y, 1.0 / std::numbers::e, 1e-3);
    const double at_optimum = cgls_complexity(100, 1.0 / std::numbers::e, 1e-14).flops;
    EXPECT_NEAR(at_optimum, 3580448.8968037301, 1e-4);
    EXPECT_NEAR(at_optimum, 4.0 * std::numbers::e * 1e4 * std::log(2.0 / 1e-14),
                1e-6 * at_optimum);
}

TEST(CrossoverRatio, NearOneThirdAndTrueRoot) {
    const double y14 = crossover_ratio(1e-14);
    EXPECT_NEAR(y14, 0.33254675592902784, 2e-6);
    EXPECT_GE(y14, 0.30);
    EXPECT_LE(y14, 0.37);

    const double rk = rk_complexity(100, y14, 1e-14).flops;
    const double cg = cgls_complexity(100, y14, 1e-14).flops;
    EXPECT_LE(std::abs(rk - cg) / cg, 1e-6);

    const double y6 = crossover_ratio(1e-6);
    EXPECT_GE(y6, 0.25);
    EXPECT_LE(y6, 0.45);
    EXPECT_NEAR(y6, 0.33890513527188536, 2e-6);
}

TEST(GaussianAsymptotics, QuarterRatioAndLimit) {
    const GaussianAsymptotics g = gaussian_asymptotics(0.25);
    EXPECT_DOUBLE_EQ(g.k_limit, 3.0);
    EXPECT_DOUBLE_EQ(g.kappa_over_sqrt_n, 2.0);
    const GaussianAsymptotics tiny = gaussian_asymptotics(1e-16);
    EXPECT_NEAR(tiny.k_limit, 1.0, 1e-7);
    EXPECT_NEAR(tiny.kappa_over_sqrt_n, 1.0, 1e-7);
    EXPECT_THROW(gaussian_asymptotics(1.0), parameter_error);
}

TEST(ExactExpectedError, IdentityTwoByTwoSymmetry) {
    DenseMatrix a = DenseMatrix::identity(2);
    Vector b = {Scalar(0), Scalar(0)};
    Vector xt = {Scalar(0), Scalar(0)};
    LinearSystem sys(std::move(a), std::move(b), std::move(xt));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Vector x0 = {Scalar(inv_sqrt2), Scalar(inv_sqrt2)};
    const std::vector<double> e = exact_expected_error(sys, x0, 3);
    EXPECT_NEAR(e[0], 1.0, 1e-15);
    EXPECT_NEAR(e[1], 0.5, 1e-15);
    EXPECT_NEAR(e[2], 0.25, 1e-15);
}

TEST(ExactExpectedError, TightnessChainIsExactlyGeometric) {
    // n=2, m=4, kappa=2: rows (e1, e2, e2, e2); from x0 = e1 the expected
    // squared error is (3/4)^k exactly.
    TightnessInstance inst = tightness_system(2, 4, 2.0);
    Vector x0 = {Scalar(1), Scalar(0)};
    const std::vector<double> e = exact_expected_error(inst.system, x0, 8);
    for (int k = 0; k <= 8; ++k)
        EXPECT_NEAR(e[static_cast<std::size_t>(k)], std::pow(0.75, k), 1e-13) << "k=" << k;
}

TEST(ExactExpectedError, EqualityCaseWhenAllSingularValuesCoincide) {
    // k(A) = 1: the upper bound is attained exactly for every k.
    DenseMatrix a = DenseMatrix::identity(3);
    Vector b = {Scalar(0), Scalar(0), Scalar(0)};
    Vector xt = {Scalar(0), Scalar(0), Scalar(0)};
    LinearSystem sys(std::move(a), std::move(b), std::move(xt));
    RngStream rng(12);
    Vector x0 = test::random_complex_vector(3, rng);
    double e0 = norm_sq(x0);
    const std::vector<double> e = exact_expected_error(sys, x0, 5);
    for (int k = 0; k <= 5; ++k)
        EXPECT_NEAR(e[static_cast<std::size_t>(k)],
                    expected_sq_error_upper_bound(std::sqrt(3.0), static_cast<std::uint64_t>(k), e0),
                    1e-12 * e0)
            << "k=" << k;
}

TEST(ExactExpectedError, RespectsUpperBoundAndContraction) {
    RngStream rng(9);
    DenseMatrix a = test::random_gaussian_matrix(3, 2, rng);
    Vector xt = test::random_complex_vector(2, rng);
    Vector b = matvec(a, xt);
    const ConditionReport cond = condition_numbers(a);
    LinearSystem sys(std::move(a), std::move(b), xt);
    Vector x0(2, Scalar(0));
    double e0 = 0.0;
    for (std::size_t j = 0; j < 2; ++j) e0 += std::norm(x0[j] - xt[j]);

    const std::vector<double> e = exact_expected_error(sys, x0, 6);
    const double rate = 1.0 - 1.0 / (cond.kappa * cond.kappa);
    for (int k = 1; k <= 6; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        EXPECT_LE(e[ku], expected_sq_error_upper_bound(cond.kappa,
                                                       static_cast<std::uint64_t>(k), e0) +
                             1e-10 * e0);
        EXPECT_LE(e[ku], e[ku - 1] * (1.0 + 1e-12));                // monotone
        EXPECT_LE(e[ku], rate * e[ku - 1] + 1e-12 * e0);            // one-step contraction
    }
}

TEST(ExactExpectedError, BudgetGuard) {
    RngStream rng(14);
    DenseMatrix a = test::random_gaussian_matrix(10, 2, rng);
    Vector xt = test::random_complex_vector(2, rng);
    Vector b = matvec(a, xt);
    LinearSystem sys(std::move(a), std::move(b), xt);
    Vector x0(2, Scalar(0));
    EXPECT_THROW(exact_expected_error(sys, x0, 8), size_error);  // 10^8 sequences
    EXPECT_NO_THROW(exact_expected_error(sys, x0, 3));
}
