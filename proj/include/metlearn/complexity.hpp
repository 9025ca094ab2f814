#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "metlearn/losses.hpp"
#include "metlearn/optimizer.hpp"

namespace metlearn {

/// Inputs for the uniform deviation bounds.
struct BoundInputs {
    double B = 1.0;       ///< support bound of the data
    double lambda = 1.0;  ///< Lipschitz slope of the loss
    int D = 1;            ///< representation dimension
    double d = 1.0;       ///< cap on ||M^T M||_F^2 over the class
    int m = 1;            ///< sample size
    double delta = 0.05;  ///< confidence level
    double gamma = 1.0;   ///< activation scale (network bound only)
};

/// Exact supremum over the unit-spectral-norm metrics of
/// (1/m) sum_i sigma_i ||M xbar_i||^2 for a fixed sign vector.
/// With S = sum_i sigma_i xbar_i xbar_i^T, the value is the positive-part
/// eigenvalue sum of S when S has a positive eigenvalue and lambda_max(S)
/// otherwise, divided by m.
double rademacher_sup_closed_form(const Eigen::VectorXd& signs,
                                  const Eigen::MatrixXd& diffs);

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;  ///< sample std / sqrt(draws)
};

/// Monte Carlo estimate of the Rademacher complexity of the induced
/// distance-function class on a fixed paired sample: the closed-form
/// supremum averaged over iid uniform sign vectors.
McEstimate rademacher_estimate(const PairedSample& s, int n_draws, std::uint64_t seed);

/// Uniform deviation bound for distance-based error scaling with the
/// representation dimension: 2 lambda 4B^2 sqrt(D/m) + sqrt(2 ln(1/delta)/m).
double ambient_deviation_bound(const BoundInputs& b);

/// The norm-refined variant: the dimension is replaced by the Frobenius
/// cap d on the quadratic form.
double refined_deviation_bound(const BoundInputs& b);

/// Adaptive deviation bound across the nested norm-bounded classes:
/// C B lambda sqrt(d ln(1/(delta mu_d)) / m). Infinite outside the prior.
double adaptive_deviation_bound(int d, int m, const SrmParams& p);

/// Sample size below which distance-based metric learning admits an
/// adversarial distribution: (D + 1) / (512 eps^2), for eps in (0, 1/64].
double hardness_sample_threshold(int D, double eps);

/// Deviation bound for the two-layer-network classifier framework:
/// B lambda gamma sqrt(d ln(D/delta) / m), with unit leading constant.
double net_deviation_bound(const BoundInputs& b);

}  // namespace metlearn
