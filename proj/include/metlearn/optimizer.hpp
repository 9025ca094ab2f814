#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "metlearn/dataset.hpp"
#include "metlearn/losses.hpp"
#include "metlearn/metric.hpp"

namespace metlearn {

struct FitOptions {
    int max_iters = 2000;
    double step0 = 0.5;     ///< step at iteration t is step0 / sqrt(t)
    double tol = 1e-7;      ///< stop when best objective improves less than this
    int patience = 100;     ///< ... over this many iterations
    std::uint64_t seed = 0;
};

/// Parameters of the adaptive complexity penalty: penalty(d) =
/// C B lambda sqrt(ln(1/(delta mu_d)) / m) for the class index d, where mu
/// is a prior over the nested norm-bounded classes d = 1, 2, ...
struct SrmParams {
    double B = 1.0;       ///< support bound of the data
    double lambda = 1.0;  ///< Lipschitz slope of the loss
    double delta = 0.05;  ///< confidence level
    double C = 1.0;       ///< framework constant (B for distance-based fits)
    Eigen::VectorXd mu;   ///< prior over d = 1..mu.size(); must sum to 1

    static SrmParams uniform_prior(double B, double lambda, double delta, int d_max);
};

/// Pairs a sequence of labeled observations consecutively:
/// (z1,z2), (z3,z4), ...; an odd trailing element is dropped.
PairedSample make_pairs(const LabeledDataset& seq);

/// Regularized sample objective: empirical distance error plus
/// Lambda ||M^T M||_F^2.
double objective(const Metric& m, const PairedSample& s, const LossSpec& spec,
                 double lambda_reg);
double objective(const Eigen::MatrixXd& m, const PairedSample& s, const LossSpec& spec,
                 double lambda_reg);

/// Subgradient of the objective in M:
///   sum_i w_i phi'(rho_i) 2 M xbar_i xbar_i^T + 4 Lambda M (M^T M).
Eigen::MatrixXd objective_gradient(const Eigen::MatrixXd& m, const PairedSample& s,
                                   const LossSpec& spec, double lambda_reg);

/// Projected subgradient descent from the identity, spectral cap enforced
/// every step; returns the best iterate seen.
Metric erm_fit(const PairedSample& s, const LossSpec& spec, double lambda_reg,
               const FitOptions& opts);

/// Same descent from an explicit starting matrix (multi-start callers).
/// best_trace, when given, records the best objective after every step.
Metric erm_fit_from(const Eigen::MatrixXd& m0, const PairedSample& s,
                    const LossSpec& spec, double lambda_reg, const FitOptions& opts,
                    std::vector<double>* best_trace = nullptr);

/// Adaptive penalty for class index d at sample size m. Returns +infinity
/// when mu_d is zero or d is outside the prior's support.
double srm_penalty(int d, int m, const SrmParams& p);

struct SrmSelection {
    Metric metric;
    int d_hat;
    double lambda_reg;  ///< regularization weight of the winning candidate
    double score;       ///< empirical error + penalty(d) * d
};

/// Fits one candidate per regularization weight on a geometric-plus-linear
/// grid and returns the one minimizing empirical error + penalty(d_M) d_M.
SrmSelection srm_select(const PairedSample& s, const LossSpec& spec, const SrmParams& p,
                        const FitOptions& opts);

/// The regularization grid used by srm_select.
std::vector<double> srm_lambda_grid();

}  // namespace metlearn
