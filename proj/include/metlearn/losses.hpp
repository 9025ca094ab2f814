#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "metlearn/metric.hpp"

namespace metlearn {

/// Parameters of the clipped distance loss: same-class pairs are penalized
/// for exceeding the upper limit U, different-class pairs for falling below
/// the lower limit L, both at slope lambda and capped at 1.
struct LossSpec {
    double lambda;  ///< penalty slope, >= 0
    double U;       ///< same-class upper limit, >= 0
    double L;       ///< different-class lower limit, > U

    LossSpec(double lambda_, double u, double l);
};

/// Consecutive-disjoint pairs of labeled observations, stored as
/// difference vectors (one column per pair) plus the label-agreement bit.
/// Optional weights generalize the flat average to a weighted one; they
/// are normalized to sum to 1.
class PairedSample {
public:
    PairedSample(Eigen::MatrixXd diffs, std::vector<std::uint8_t> same_label);
    PairedSample(Eigen::MatrixXd diffs, std::vector<std::uint8_t> same_label,
                 Eigen::VectorXd weights);

    int dim() const { return static_cast<int>(diffs_.rows()); }
    int size() const { return static_cast<int>(diffs_.cols()); }
    const Eigen::MatrixXd& diffs() const { return diffs_; }
    bool same_label(int i) const { return same_[static_cast<std::size_t>(i)] != 0; }
    const Eigen::VectorXd& weights() const { return weights_; }

private:
    Eigen::MatrixXd diffs_;            // D x m
    std::vector<std::uint8_t> same_;   // Y_i = 1[y_1 = y_2]
    Eigen::VectorXd weights_;          // normalized, sum = 1
};

/// Ordered triples, stored as the two difference vectors against the
/// anchor plus whether the triple is active (y1 = y2 != y3).
class TripletSample {
public:
    TripletSample(Eigen::MatrixXd diffs12, Eigen::MatrixXd diffs13,
                  std::vector<std::uint8_t> active);

    int dim() const { return static_cast<int>(diffs12_.rows()); }
    int size() const { return static_cast<int>(diffs12_.cols()); }
    const Eigen::MatrixXd& diffs12() const { return diffs12_; }
    const Eigen::MatrixXd& diffs13() const { return diffs13_; }
    bool active(int i) const { return active_[static_cast<std::size_t>(i)] != 0; }

private:
    Eigen::MatrixXd diffs12_;
    Eigen::MatrixXd diffs13_;
    std::vector<std::uint8_t> active_;
};

/// Clipped pairwise distance loss in [0, 1]:
///   Y = 1: min{1, lambda * [rho - U]+}
///   Y = 0: min{1, lambda * [L - rho]+}
double pair_loss(const LossSpec& spec, double rho, bool same_label);

/// Relative-distance loss: min{1, lambda * [rho12 - rho13]+} when
/// y1 = y2 != y3, zero otherwise.
double triplet_loss(const LossSpec& spec, double rho12, double rho13, int y1,
                    int y2, int y3);

/// A deterministic subgradient of pair_loss in rho. On the open linear
/// region it is +-lambda; at both kinks the flat side (0) is returned.
double pair_loss_subgradient(const LossSpec& spec, double rho, bool same_label);

/// Weighted mean of pair_loss over a paired sample under metric m.
double empirical_distance_error(const Metric& m, const PairedSample& s,
                                const LossSpec& spec);

/// Same, on a raw weighting matrix (optimizer inner loops).
double empirical_distance_error(const Eigen::MatrixXd& m, const PairedSample& s,
                                const LossSpec& spec);

}  // namespace metlearn
