#include "metlearn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metlearn/errors.hpp"
#include "metlearn/rng.hpp"

namespace metlearn {

SrmParams SrmParams::uniform_prior(double B, double lambda, double delta, int d_max) {
    SrmParams p;
    p.B = B;
    p.lambda = lambda;
    p.delta = delta;
    p.C = B;
    p.mu = Eigen::VectorXd::Constant(d_max, 1.0 / static_cast<double>(d_max));
    return p;
}

PairedSample make_pairs(const LabeledDataset& seq) {
    const int n = seq.size();
    if (n < 2) throw DataError("make_pairs: need at least two observations");
    const int m = n / 2;
    Eigen::MatrixXd diffs(seq.dim(), m);
    std::vector<std::uint8_t> same(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        diffs.col(i) = seq.points.col(2 * i) - seq.points.col(2 * i + 1);
        same[static_cast<std::size_t>(i)] =
            seq.labels[static_cast<std::size_t>(2 * i)] ==
            seq.labels[static_cast<std::size_t>(2 * i + 1)];
    }
    return PairedSample(std::move(diffs), std::move(same));
}

double objective(const Eigen::MatrixXd& m, const PairedSample& s, const LossSpec& spec,
                 double lambda_reg) {
    const double penalty =
        lambda_reg == 0.0 ? 0.0 : lambda_reg * (m.transpose() * m).squaredNorm();
    return empirical_distance_error(m, s, spec) + penalty;
}

double objective(const Metric& m, const PairedSample& s, const LossSpec& spec,
                 double lambda_reg) {
    return objective(m.matrix(), s, spec, lambda_reg);
}

Eigen::MatrixXd objective_gradient(const Eigen::MatrixXd& m, const PairedSample& s,
                                   const LossSpec& spec, double lambda_reg) {
    if (m.rows() != s.dim()) {
        throw DataError("objective_gradient: dimension mismatch");
    }
    const Eigen::MatrixXd mapped = m * s.diffs();  // columns M xbar_i
    Eigen::VectorXd coeff(s.size());
    for (int i = 0; i < s.size(); ++i) {
        coeff[i] = s.weights()[i] * pair_loss_subgradient(spec, mapped.col(i).squaredNorm(),
                                                          s.same_label(i));
    }
    // sum_i c_i 2 M xbar_i xbar_i^T = 2 (M Xbar) diag(c) Xbar^T
    Eigen::MatrixXd grad =
        2.0 * (mapped * coeff.asDiagonal()) * s.diffs().transpose();
    if (lambda_reg != 0.0) {
        grad.noalias() += (4.0 * lambda_reg) * (m * (m.transpose() * m));
    }
    return grad;
}

Metric erm_fit_from(const Eigen::MatrixXd& m0, const PairedSample& s,
                    const LossSpec& spec, double lambda_reg, const FitOptions& opts,
                    std::vector<double>* best_trace) {
    if (opts.max_iters < 1 || !(opts.step0 > 0.0) || !(opts.tol > 0.0)) {
        throw DataError("erm_fit: invalid options");
    }
    if (m0.rows() != s.dim() || m0.cols() != s.dim()) {
        throw DataError("erm_fit: starting matrix has wrong shape");
    }

    Eigen::MatrixXd m = spectral_clip(m0);
    Eigen::MatrixXd best = m;
    double best_obj = objective(m, s, spec, lambda_reg);
    if (!std::isfinite(best_obj)) {
        throw NumericError("erm_fit: non-finite objective at start");
    }
    if (best_trace) best_trace->push_back(best_obj);

    double window_best = best_obj;
    int window = 0;
    for (int t = 1; t <= opts.max_iters; ++t) {
        const Eigen::MatrixXd grad = objective_gradient(m, s, spec, lambda_reg);
        // Clip long subgradients to unit Frobenius norm; keeps the step
        // schedule meaningful when the penalty term dwarfs the loss.
        const double scale = std::max(1.0, grad.norm());
        const double step = opts.step0 / std::sqrt(static_cast<double>(t));
        m = spectral_clip(m - (step / scale) * grad);
        const double obj = objective(m, s, spec, lambda_reg);
        if (!std::isfinite(obj)) {
            throw NumericError("erm_fit: objective diverged (step size too large?)");
        }
        if (obj < best_obj) {
            best_obj = obj;
            best = m;
        }
        if (best_trace) best_trace->push_back(best_obj);
        // Stop once a full patience window passes without tol improvement.
        if (++window >= opts.patience) {
            if (window_best - best_obj < opts.tol) break;
            window_best = best_obj;
            window = 0;
        }
    }
    return Metric(best);
}

Metric erm_fit(const PairedSample& s, const LossSpec& spec, double lambda_reg,
               const FitOptions& opts) {
    return erm_fit_from(Eigen::MatrixXd::Identity(s.dim(), s.dim()), s, spec,
                        lambda_reg, opts);
}

double srm_penalty(int d, int m, const SrmParams& p) {
    if (d < 1) throw DataError("srm_penalty: d must be >= 1");
    if (m < 1) throw DataError("srm_penalty: m must be >= 1");
    if (!(p.delta > 0.0 && p.delta < 1.0)) {
        throw DataError("srm_penalty: delta must lie in (0, 1)");
    }
    // The union bound across classes needs total prior mass at most 1.
    if (p.mu.size() == 0 || (p.mu.array() < 0.0).any() || p.mu.sum() > 1.0 + 1e-9) {
        throw DataError("srm_penalty: mu must be a sub-probability vector");
    }
    // Outside the prior's support the penalty is infinite; callers treat
    // such candidates as inadmissible rather than erroring out.
    if (d > p.mu.size() || !(p.mu[d - 1] > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return p.C * p.B * p.lambda *
           std::sqrt(std::log(1.0 / (p.delta * p.mu[d - 1])) / static_cast<double>(m));
}

std::vector<double> srm_lambda_grid() {
    std::vector<double> grid = {0.0, 1e-4, 1e-3, 1e-2, 10.0};
    for (int i = 1; i <= 10; ++i) grid.push_back(0.1 * i);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

SrmSelection srm_select(const PairedSample& s, const LossSpec& spec, const SrmParams& p,
                        const FitOptions& opts) {
    const auto grid = srm_lambda_grid();
    bool found = false;
    SrmSelection sel{Metric::identity(s.dim()), 1, 0.0,
                     std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        FitOptions run = opts;
        run.seed = derive_seed(opts.seed, i);
        Metric cand = erm_fit(s, spec, grid[i], run);
        const int d = frobenius_complexity(cand).d;
        const double score = empirical_distance_error(cand, s, spec) +
                             srm_penalty(d, s.size(), p) * static_cast<double>(d);
        if (std::isfinite(score) && score < sel.score) {
            sel = SrmSelection{std::move(cand), d, grid[i], score};
            found = true;
        }
    }
    if (!found) throw NumericError("srm_select: no candidate had a finite score");
    return sel;
}

}  // namespace metlearn
