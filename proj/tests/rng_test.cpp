#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kaczmarz/linalg.hpp"
#include "kaczmarz/rng.hpp"
#include "test_support.hpp"

using namespace kaczmarz;

TEST(RngStream, IdenticalSeedsGiveIdenticalSequences) {
    RngStream a(42), b(42);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    RngStream c(42), d(42);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(c.uniform01(), d.uniform01());
    RngStream e(42), f(42);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(e.standard_normal(), f.standard_normal());
}

TEST(RngStream, Uniform01RangeProperty) {
    RngStream rng(7);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform01();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(RngStream, UniformKolmogorovSmirnov) {
    RngStream rng(19);
    std::vector<double> sample(100000);
    for (double& u : sample) u = rng.uniform01();
    EXPECT_LT(test::ks_statistic_uniform(std::move(sample)), 0.01);
}

TEST(RngStream, NormalMomentsWithinCltBounds) {
    RngStream rng(23);
    const int n = 1'000'000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.standard_normal();
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    EXPECT_NEAR(mean, 0.0, 0.005);
    EXPECT_NEAR(var, 1.0, 0.01);
}

TEST(DeriveStream, DeterministicAndDistinct) {
    RngStream a = derive_stream(7, 0);
    RngStream b = derive_stream(7, 0);
    bool all_equal = true;
    for (int i = 0; i < 64; ++i)
        if (a.next_u64() != b.next_u64()) all_equal = false;
    EXPECT_TRUE(all_equal);

    RngStream c = derive_stream(7, 0);
    RngStream d = derive_stream(7, 1);
    bool any_diff = false;
    for (int i = 0; i < 64; ++i)
        if (c.next_u64() != d.next_u64()) any_diff = true;
    EXPECT_TRUE(any_diff);
}

TEST(DeriveStream, FirstDrawsLookIndependentAcrossStreams) {
    const int count = 1000;
    std::vector<double> first(count);
    for (int i = 0; i < count; ++i)
        first[i] = derive_stream(99, static_cast<std::uint64_t>(i)).uniform01();

    double mean = 0.0;
    for (double v : first) mean += v;
    mean /= count;
    double var = 0.0;
    for (double v : first) var += (v - mean) * (v - mean);
    var /= count;
    ASSERT_GT(var, 0.0);

    // Serial correlation of the first-draw sequence at small lags.
    for (int lag = 1; lag <= 5; ++lag) {
        double cov = 0.0;
        for (int i = 0; i + lag < count; ++i)
            cov += (first[i] - mean) * (first[i + lag] - mean);
        cov /= (count - lag);
        EXPECT_LT(std::abs(cov / var), 0.1) << "lag " << lag;
    }
}

TEST(WeightedIndexDistribution, CumulativeAndProbabilities) {
    WeightedIndexDistribution dist({1.0, 3.0});
    EXPECT_DOUBLE_EQ(dist.total(), 4.0);
    EXPECT_DOUBLE_EQ(dist.probability(0), 0.25);
    EXPECT_DOUBLE_EQ(dist.probability(1), 0.75);
    EXPECT_DOUBLE_EQ(dist.cumulative().back(), dist.total());
}

TEST(WeightedIndexDistribution, RejectsNonPositiveWeights) {
    EXPECT_THROW(WeightedIndexDistribution({1.0, 0.0}), degenerate_row_error);
    EXPECT_THROW(WeightedIndexDistribution({}), parameter_error);
}

TEST(BuildRowDistribution, WeightsAreSquaredRowNorms) {
    DenseMatrix a = DenseMatrix::from_rows({{Scalar(1), Scalar(0)},
                                            {Scalar(1), Scalar(1, 1)}});
    const WeightedIndexDistribution dist = build_row_distribution(a);
    EXPECT_DOUBLE_EQ(dist.weights()[0], 1.0);
    EXPECT_DOUBLE_EQ(dist.weights()[1], 3.0);
    EXPECT_NEAR(dist.total(), frobenius_norm_sq(a), 1e-12 * dist.total());
}

TEST(BuildRowDistribution, UnitRowsGiveUniformWeights) {
    DenseMatrix a = DenseMatrix::identity(5);
    const WeightedIndexDistribution dist = build_row_distribution(a);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(dist.probability(j), 0.2);
}

TEST(BuildRowDistribution, ZeroRowNamesTheRow) {
    DenseMatrix a(3, 2);
    a(0, 0) = Scalar(1);
    a(2, 0) = Scalar(1);  // row 1 left zero
    try {
        build_row_distribution(a);
        FAIL() << "expected degenerate_row_error";
    } catch (const degenerate_row_error& e) {
        EXPECT_EQ(e.row(), 1u);
    }
}

TEST(SampleIndex, SingleIndexAlwaysZero) {
    WeightedIndexDistribution dist({2.5});
    RngStream rng(3);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_index(dist, rng), 0u);
}

TEST(SampleIndex, EmpiricalFrequencyMatchesWeights) {
    WeightedIndexDistribution dist({1.0, 3.0});
    RngStream rng(101);
    const int n = 1'000'000;
    int hits = 0;
    for (int i = 0; i < n; ++i)
        if (sample_index(dist, rng) == 1) ++hits;
    // 4 sigma band: sqrt(0.75 * 0.25 / 1e6) ~ 4.3e-4.
    EXPECT_NEAR(static_cast<double>(hits) / n, 0.75, 0.002);
}

TEST(SampleIndex, FixedSeedReproducesDraws) {
    WeightedIndexDistribution dist({0.5, 1.5, 2.0});
    RngStream a(5), b(5);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_index(dist, a), sample_index(dist, b));
}

TEST(SampleIndex, ChiSquareGoodnessOfFit) {
    // m <= 8 indices, 1e6 draws, significance 1e-4.
    const std::vector<double> weights = {0.3, 1.1, 0.7, 2.4, 0.9, 1.6};
    WeightedIndexDistribution dist(weights);
    RngStream rng(77);
    const int n = 1'000'000;
    std::vector<int> counts(weights.size(), 0);
    for (int i = 0; i < n; ++i) ++counts[sample_index(dist, rng)];
    double chi2 = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const double expect = dist.probability(j) * n;
        const double diff = counts[j] - expect;
        chi2 += diff * diff / expect;
    }
    EXPECT_LT(chi2, test::chi2_critical_1e4(weights.size() - 1));
}
