#include "metlearn/losses.hpp"

#include <algorithm>
#include <cmath>

#include "metlearn/errors.hpp"

namespace metlearn {

LossSpec::LossSpec(double lambda_, double u, double l) : lambda(lambda_), U(u), L(l) {
    if (lambda < 0.0 || !std::isfinite(lambda)) {
        throw DataError("LossSpec: lambda must be finite and >= 0");
    }
    if (!(U >= 0.0) || !(L > U)) {
        throw DataError("LossSpec: limits must satisfy 0 <= U < L");
    }
}

PairedSample::PairedSample(Eigen::MatrixXd diffs, std::vector<std::uint8_t> same_label)
    : PairedSample(std::move(diffs), std::move(same_label), Eigen::VectorXd()) {}

PairedSample::PairedSample(Eigen::MatrixXd diffs, std::vector<std::uint8_t> same_label,
                           Eigen::VectorXd weights)
    : diffs_(std::move(diffs)), same_(std::move(same_label)), weights_(std::move(weights)) {
    const auto m = diffs_.cols();
    if (m < 1) throw DataError("PairedSample: needs at least one pair");
    if (static_cast<Eigen::Index>(same_.size()) != m) {
        throw DataError("PairedSample: label count does not match pair count");
    }
    if (weights_.size() == 0) {
        weights_ = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    } else {
        if (weights_.size() != m) {
            throw DataError("PairedSample: weight count does not match pair count");
        }
        if ((weights_.array() < 0).any()) {
            throw DataError("PairedSample: weights must be non-negative");
        }
        const double total = weights_.sum();
        if (!(total > 0.0)) throw DataError("PairedSample: weights sum to zero");
        weights_ /= total;
    }
    if (!diffs_.allFinite()) throw NumericError("PairedSample: non-finite observation");
}

TripletSample::TripletSample(Eigen::MatrixXd diffs12, Eigen::MatrixXd diffs13,
                             std::vector<std::uint8_t> active)
    : diffs12_(std::move(diffs12)), diffs13_(std::move(diffs13)), active_(std::move(active)) {
    if (diffs12_.cols() != diffs13_.cols() || diffs12_.rows() != diffs13_.rows()) {
        throw DataError("TripletSample: inconsistent shapes");
    }
    if (static_cast<Eigen::Index>(active_.size()) != diffs12_.cols()) {
        throw DataError("TripletSample: flag count does not match triple count");
    }
}

double pair_loss(const LossSpec& spec, double rho, bool same_label) {
    const double violation =
        same_label ? std::max(0.0, rho - spec.U) : std::max(0.0, spec.L - rho);
    return std::min(1.0, spec.lambda * violation);
}

double triplet_loss(const LossSpec& spec, double rho12, double rho13, int y1, int y2,
                    int y3) {
    if (!(y1 == y2 && y2 != y3)) return 0.0;
    return std::min(1.0, spec.lambda * std::max(0.0, rho12 - rho13));
}

double pair_loss_subgradient(const LossSpec& spec, double rho, bool same_label) {
    if (spec.lambda == 0.0) return 0.0;
    const double cap = 1.0 / spec.lambda;  // violation size where the clip kicks in
    if (same_label) {
        return (rho > spec.U && rho < spec.U + cap) ? spec.lambda : 0.0;
    }
    return (rho > spec.L - cap && rho < spec.L) ? -spec.lambda : 0.0;
}

namespace {

double weighted_error(const Eigen::MatrixXd& m, const PairedSample& s,
                      const LossSpec& spec) {
    if (m.rows() != s.dim()) {
        throw DataError("empirical_distance_error: dimension mismatch");
    }
    const Eigen::MatrixXd mapped = m * s.diffs();
    double total = 0.0;
    for (int i = 0; i < s.size(); ++i) {
        total += s.weights()[i] * pair_loss(spec, mapped.col(i).squaredNorm(),
                                            s.same_label(i));
    }
    return total;
}

}  // namespace

double empirical_distance_error(const Metric& m, const PairedSample& s,
                                const LossSpec& spec) {
    return weighted_error(m.matrix(), s, spec);
}

double empirical_distance_error(const Eigen::MatrixXd& m, const PairedSample& s,
                                const LossSpec& spec) {
    return weighted_error(m, s, spec);
}

}  // namespace metlearn
