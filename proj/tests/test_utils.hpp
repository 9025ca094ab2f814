#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "metlearn/losses.hpp"
#include "metlearn/rng.hpp"

namespace testutil {

inline Eigen::MatrixXd random_matrix(int rows, int cols, double lo, double hi,
                                     std::uint64_t seed) {
    metlearn::SplitMix64 rng(seed);
    Eigen::MatrixXd a(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) a(i, j) = rng.next_uniform(lo, hi);
    }
    return a;
}

inline Eigen::VectorXd random_vector(int n, double lo, double hi, std::uint64_t seed) {
    return random_matrix(n, 1, lo, hi, seed);
}

/// A random matrix rescaled onto the unit spectral sphere.
inline Eigen::MatrixXd random_unit_spectral(int dim, std::uint64_t seed) {
    Eigen::MatrixXd a = random_matrix(dim, dim, -1.0, 1.0, seed);
    const double s = metlearn::spectral_norm(a);
    if (s > 0.0) a /= s;
    return a;
}

/// A paired sample with uniform entries and random agreement bits.
inline metlearn::PairedSample random_pairs(int dim, int m, double scale,
                                           std::uint64_t seed) {
    metlearn::SplitMix64 rng(seed);
    Eigen::MatrixXd diffs(dim, m);
    std::vector<std::uint8_t> same(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < dim; ++j) diffs(j, i) = rng.next_uniform(-scale, scale);
        same[static_cast<std::size_t>(i)] = rng.next_u64() & 1;
    }
    return metlearn::PairedSample(std::move(diffs), std::move(same));
}

}  // namespace testutil
