#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <utility>

#include "metlearn/dataset.hpp"
#include "metlearn/losses.hpp"
#include "metlearn/metric.hpp"
#include "metlearn/optimizer.hpp"

namespace metlearn {

/// Two-layer feed-forward network x -> sum_i w_i tanh(gamma v_i . x) with
/// ||w||_1 <= 1 and ||v_i||_1 <= 1 for every hidden row. Output lies in
/// [-1, 1]; the affine map (h + 1)/2 bridges to [0, 1]-valued hypotheses.
class NetHypothesis {
public:
    NetHypothesis(Eigen::VectorXd w, Eigen::MatrixXd v, double gamma);

    int hidden_units() const { return static_cast<int>(w_.size()); }
    int dim() const { return static_cast<int>(v_.cols()); }
    double gamma() const { return gamma_; }
    const Eigen::VectorXd& w() const { return w_; }
    const Eigen::MatrixXd& v() const { return v_; }

private:
    Eigen::VectorXd w_;  // K output weights
    Eigen::MatrixXd v_;  // K x D hidden rows
    double gamma_;
};

/// The activation: tanh(gamma t). Odd, strictly increasing,
/// gamma-Lipschitz, zero at zero, range (-1, 1).
double activation(double gamma, double t);

/// Network output in [-1, 1].
double net_forward(const NetHypothesis& h, const Eigen::VectorXd& x);

/// Fraction of samples whose confidence margin relative to 1/2 falls
/// below gamma_margin, with yhat = (h(Mx) + 1)/2 and
/// margin(yhat, y) = yhat - 1/2 when y = 1, else 1/2 - yhat.
double margin_empirical_error(const NetHypothesis& h, const Metric& m,
                              const LabeledDataset& s, double gamma_margin);

/// Mean clipped classifier loss min{1, lambda |yhat - y|} over the sample;
/// only spec.lambda participates.
double classifier_loss_error(const NetHypothesis& h, const Metric& m,
                             const LabeledDataset& s, const LossSpec& spec);

/// Training 0/1 error thresholding yhat at 1/2.
double net_classification_error(const NetHypothesis& h, const Metric& m,
                                const LabeledDataset& s);

/// Euclidean projection onto the l1 ball of the given radius
/// (sort-based simplex projection on magnitudes, signs restored).
Eigen::VectorXd l1_ball_project(const Eigen::VectorXd& v, double radius);

/// Alternating projected subgradient descent over (M, w, V) on
/// classifier loss + Lambda ||M^T M||_F^2; one metric step then one
/// network step per iteration, best iterate returned.
std::pair<Metric, NetHypothesis> joint_fit(const LabeledDataset& s, int hidden_units,
                                           double gamma, const LossSpec& spec,
                                           double lambda_reg, const FitOptions& opts);

/// Plain text: line 1 "K D gamma", line 2 the output weights, then K rows
/// of hidden weights, 17 significant digits.
void save_net(const NetHypothesis& h, std::ostream& out);
void save_net(const NetHypothesis& h, const std::string& path);
NetHypothesis load_net(std::istream& in);
NetHypothesis load_net(const std::string& path);

}  // namespace metlearn
