#include "metlearn/complexity.hpp"

#include <cmath>

#include "metlearn/errors.hpp"
#include "metlearn/rng.hpp"

namespace metlearn {

double rademacher_sup_closed_form(const Eigen::VectorXd& signs,
                                  const Eigen::MatrixXd& diffs) {
    const Eigen::Index m = diffs.cols();
    if (signs.size() != m) {
        throw DataError("rademacher_sup_closed_form: length mismatch");
    }
    if (m < 1) throw DataError("rademacher_sup_closed_form: empty sample");
    const Eigen::MatrixXd s = diffs * signs.asDiagonal() * diffs.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double top = lam.maxCoeff();
    const double value = top > 0.0 ? lam.cwiseMax(0.0).sum() : top;
    return value / static_cast<double>(m);
}

McEstimate rademacher_estimate(const PairedSample& s, int n_draws, std::uint64_t seed) {
    if (n_draws < 2) throw DataError("rademacher_estimate: need at least 2 draws");
    const int m = s.size();
    double sum = 0.0, sum_sq = 0.0;
    Eigen::VectorXd signs(m);
    for (int k = 0; k < n_draws; ++k) {
        // Per-draw stream so the estimate is independent of evaluation order.
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        for (int i = 0; i < m; ++i) signs[i] = rng.next_sign();
        const double v = rademacher_sup_closed_form(signs, s.diffs());
        sum += v;
        sum_sq += v * v;
    }
    const double n = static_cast<double>(n_draws);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n)};
}

namespace {

void check_bound_inputs(const BoundInputs& b) {
    if (b.m < 1) throw DataError("deviation bound: m must be >= 1");
    if (!(b.delta > 0.0 && b.delta < 1.0)) {
        throw DataError("deviation bound: delta must lie in (0, 1)");
    }
    if (b.lambda < 0.0 || b.B <= 0.0) {
        throw DataError("deviation bound: need lambda >= 0 and B > 0");
    }
}

double deviation_bound(double complexity_cap, const BoundInputs& b) {
    const double m = static_cast<double>(b.m);
    // Loss values are clipped to [0, 1], so the concentration term carries
    // a unit constant.
    return 2.0 * b.lambda * 4.0 * b.B * b.B * std::sqrt(complexity_cap / m) +
           std::sqrt(2.0 * std::log(1.0 / b.delta) / m);
}

}  // namespace

double ambient_deviation_bound(const BoundInputs& b) {
    check_bound_inputs(b);
    if (b.D < 1) throw DataError("ambient_deviation_bound: D must be >= 1");
    return deviation_bound(static_cast<double>(b.D), b);
}

double refined_deviation_bound(const BoundInputs& b) {
    check_bound_inputs(b);
    if (!(b.d > 0.0)) throw DataError("refined_deviation_bound: d must be > 0");
    return deviation_bound(b.d, b);
}

double adaptive_deviation_bound(int d, int m, const SrmParams& p) {
    // srm_penalty validates and handles mu_d = 0 by returning +infinity.
    return srm_penalty(d, m, p) * std::sqrt(static_cast<double>(d));
}

double hardness_sample_threshold(int D, double eps) {
    if (D < 1) throw DataError("hardness_sample_threshold: D must be >= 1");
    if (!(eps > 0.0 && eps <= 1.0 / 64.0)) {
        throw DataError("hardness_sample_threshold: eps must lie in (0, 1/64]");
    }
    return static_cast<double>(D + 1) / (512.0 * eps * eps);
}

double net_deviation_bound(const BoundInputs& b) {
    check_bound_inputs(b);
    if (b.D < 1 || !(b.d > 0.0) || b.gamma < 0.0) {
        throw DataError("net_deviation_bound: need D >= 1, d > 0, gamma >= 0");
    }
    return b.B * b.lambda * b.gamma *
           std::sqrt(b.d * std::log(static_cast<double>(b.D) / b.delta) /
                     static_cast<double>(b.m));
}

}  // namespace metlearn
