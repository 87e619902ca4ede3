#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/linalg.hpp"

namespace kaczmarz {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace detail

/// Deterministic seeded generator: xoshiro256++ with splitmix64 state
/// expansion. Identical seeds give bit-identical variate sequences on any
/// platform with IEEE-754 doubles. Single-owner; copy to fork.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed = 0) : seed_(seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the paired variate is cached.
    double standard_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // 1 - u keeps the log argument in (0, 1].
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::uint64_t seed_;
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives an independent stream for a trial index by mixing the master
/// seed and the index through splitmix64. Same inputs, same stream.
inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t sm = master_seed;
    std::uint64_t a = detail::splitmix64(sm);
    sm ^= index * 0x9e3779b97f4a7c15ull + 0x6a09e667f3bcc909ull;
    std::uint64_t b = detail::splitmix64(sm);
    return RngStream(a ^ b);
}

/// Discrete distribution over row indices; probability of j is
/// weights[j] / total. Sampling is one uniform draw plus binary search
/// over the cumulative sums.
class WeightedIndexDistribution {
  public:
    explicit WeightedIndexDistribution(std::vector<double> weights)
        : weights_(std::move(weights)) {
        if (weights_.empty())
            throw parameter_error("WeightedIndexDistribution: no weights");
        cumulative_.resize(weights_.size());
        double acc = 0.0;
        for (std::size_t j = 0; j < weights_.size(); ++j) {
            if (!(weights_[j] > 0.0) || !std::isfinite(weights_[j]))
                throw degenerate_row_error(
                    "WeightedIndexDistribution: weight must be positive", j);
            acc += weights_[j];
            cumulative_[j] = acc;
        }
        total_ = acc;
    }

    std::size_t size() const { return weights_.size(); }
    double total() const { return total_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& cumulative() const { return cumulative_; }

    double probability(std::size_t j) const { return weights_[j] / total_; }

  private:
    std::vector<double> weights_;
    std::vector<double> cumulative_;
    double total_ = 0.0;
};

/// Row-selection distribution with weights ||a_j||^2, so row j is drawn
/// with probability ||a_j||^2 / ||A||_F^2.
inline WeightedIndexDistribution build_row_distribution(const DenseMatrix& a) {
    std::vector<double> w(a.rows());
    for (std::size_t j = 0; j < a.rows(); ++j) {
        w[j] = row_norm_sq(a, j);
        if (!(w[j] > 0.0))
            throw degenerate_row_error("build_row_distribution: zero row", j);
    }
    return WeightedIndexDistribution(std::move(w));
}

/// Draws an index: u uniform in [0, total), then the first cumulative
/// value exceeding u.
inline std::size_t sample_index(const WeightedIndexDistribution& dist, RngStream& rng) {
    const double u = rng.uniform01() * dist.total();
    const auto& cum = dist.cumulative();
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    if (it == cum.end()) --it; // u landed on the last boundary by rounding
    return static_cast<std::size_t>(it - cum.begin());
}

} // namespace kaczmarz
