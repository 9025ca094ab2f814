#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "metlearn/dataset.hpp"
#include "metlearn/losses.hpp"
#include "metlearn/metric.hpp"
#include "metlearn/optimizer.hpp"

namespace metlearn {

/// Vertices of a regular n-simplex circumscribed in the unit sphere of
/// R^n, one vertex per column (n+1 columns). Every vertex has unit norm
/// and all pairwise squared distances equal 2(n+1)/n.
Eigen::MatrixXd simplex_vertices(int n);

/// Squared distance between the centroids of a k / (n+1-k) bipartition of
/// the simplex vertices: (n+1)^2 / (k n (n+1-k)), at least 4/n.
double centroid_gap(int n, int k);

/// Adversarial distribution on the simplex vertices: the vertex is
/// uniform, and the label at vertex i is 1 with probability
/// (1 + sqrt(alpha))/2 when p[i] = 1 and (1 - sqrt(alpha))/2 otherwise.
struct SimplexDistribution {
    int dim = 0;
    Eigen::MatrixXd vertices;     // dim x (dim+1)
    double alpha = 0.0;           // in (0, 1)
    std::vector<std::uint8_t> p;  // majority label per vertex

    SimplexDistribution(int dim, double alpha, std::vector<std::uint8_t> p);
};

/// m iid draws from the distribution.
LabeledDataset adversarial_sample(const SimplexDistribution& dist, int m,
                                  std::uint64_t seed);

/// The risk-optimal metric for majority labels p: the rank-one projector
/// onto the normalized difference of the two label-group centroids, or
/// the zero metric when p is constant.
Metric bayes_optimal_metric(const std::vector<std::uint8_t>& p,
                            const Eigen::MatrixXd& vertices);

/// Loss parameters used throughout the hardness experiments:
/// U = 0, L = 4/D, lambda = D/4.
LossSpec hardness_loss(int dim);

/// Exact distance-based risk of a weighting matrix under the distribution
/// (the support is finite, so the expectation is a sum).
double exact_distance_risk(const Eigen::MatrixXd& m, const SimplexDistribution& dist,
                           const LossSpec& spec);

/// Failure probability floor for estimating a coin's bias from m flips:
/// (1/4) (1 - sqrt(1 - exp(-2 ceil(m/2) eps^2 / (1 - eps^2)))).
double coin_failure_bound(double eps, int m);

/// Monte Carlo estimate of the probability that the majority-vote
/// estimator misidentifies a coin drawn uniformly from biases
/// 1/2 -+ eps/2 (ties broken uniformly at random).
double coin_mc_failure(double eps, int m, int trials, std::uint64_t seed);

struct LowerboundRow {
    int D = 0;
    double alpha = 0.0;
    int m = 0;
    int trials = 0;
    double failure_fraction = 0.0;
    double threshold_m = 0.0;  ///< hardness_sample_threshold(D, eps)
};

struct LowerboundOptions {
    int D = 16;
    double alpha = 0.25;
    std::vector<int> m_grid = {50, 100, 500, 1000, 5000};
    int trials = 200;
    double eps = 0.05;
    std::uint64_t seed = 0;
    FitOptions fit;
};

/// For each sample size in the grid: draws a random majority-label vector,
/// samples paired training sets, fits by empirical risk minimization
/// (three starts: identity, 1e-3 I, and the risk-optimal metric of the
/// empirical majority bits), and reports the fraction of trials whose
/// exact excess risk over the risk-optimal metric exceeds eps.
std::vector<LowerboundRow> lowerbound_experiment(const LowerboundOptions& opts);

}  // namespace metlearn
