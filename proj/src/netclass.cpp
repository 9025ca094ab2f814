#include "metlearn/netclass.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <vector>

#include "metlearn/errors.hpp"
#include "metlearn/rng.hpp"

namespace metlearn {

namespace {

constexpr double kL1Slack = 1e-9;

void check_binary_labels(const LabeledDataset& s, const char* who) {
    if (s.size() < 1) throw DataError(std::string(who) + ": empty sample");
    for (int y : s.labels) {
        if (y != 0 && y != 1) {
            throw DataError(std::string(who) + ": labels must be 0/1");
        }
    }
}

}  // namespace

NetHypothesis::NetHypothesis(Eigen::VectorXd w, Eigen::MatrixXd v, double gamma)
    : w_(std::move(w)), v_(std::move(v)), gamma_(gamma) {
    if (w_.size() < 1 || v_.rows() != w_.size() || v_.cols() < 1) {
        throw DataError("NetHypothesis: inconsistent shapes");
    }
    if (!(gamma_ > 0.0)) throw DataError("NetHypothesis: gamma must be > 0");
    if (!w_.allFinite() || !v_.allFinite()) {
        throw NumericError("NetHypothesis: non-finite weights");
    }
    if (w_.lpNorm<1>() > 1.0 + kL1Slack) {
        throw DataError("NetHypothesis: ||w||_1 exceeds 1");
    }
    for (Eigen::Index i = 0; i < v_.rows(); ++i) {
        if (v_.row(i).lpNorm<1>() > 1.0 + kL1Slack) {
            throw DataError("NetHypothesis: a hidden row exceeds the l1 ball");
        }
    }
}

double activation(double gamma, double t) { return std::tanh(gamma * t); }

double net_forward(const NetHypothesis& h, const Eigen::VectorXd& x) {
    if (x.size() != h.dim()) throw DataError("net_forward: dimension mismatch");
    const Eigen::VectorXd pre = h.v() * x;
    double out = 0.0;
    for (Eigen::Index i = 0; i < pre.size(); ++i) {
        out += h.w()[i] * activation(h.gamma(), pre[i]);
    }
    return out;
}

namespace {

double margin_of(double yhat, int y) { return y == 1 ? yhat - 0.5 : 0.5 - yhat; }

// yhat values (h(Mx)+1)/2 for the whole sample.
Eigen::VectorXd forward_all(const Eigen::VectorXd& w, const Eigen::MatrixXd& v,
                            double gamma, const Eigen::MatrixXd& mapped) {
    const Eigen::MatrixXd act = (gamma * (v * mapped)).array().tanh().matrix();
    return (((act.transpose() * w).array() + 1.0) * 0.5).matrix();
}

}  // namespace

double margin_empirical_error(const NetHypothesis& h, const Metric& m,
                              const LabeledDataset& s, double gamma_margin) {
    check_binary_labels(s, "margin_empirical_error");
    if (!(gamma_margin > 0.0 && gamma_margin < 0.5)) {
        throw DataError("margin_empirical_error: margin must lie in (0, 1/2)");
    }
    if (s.dim() != m.dim() || h.dim() != m.dim()) {
        throw DataError("margin_empirical_error: dimension mismatch");
    }
    const Eigen::VectorXd yhat =
        forward_all(h.w(), h.v(), h.gamma(), m.matrix() * s.points);
    int below = 0;
    for (int i = 0; i < s.size(); ++i) {
        if (margin_of(yhat[i], s.labels[static_cast<std::size_t>(i)]) < gamma_margin) {
            ++below;
        }
    }
    return static_cast<double>(below) / static_cast<double>(s.size());
}

double classifier_loss_error(const NetHypothesis& h, const Metric& m,
                             const LabeledDataset& s, const LossSpec& spec) {
    check_binary_labels(s, "classifier_loss_error");
    if (s.dim() != m.dim() || h.dim() != m.dim()) {
        throw DataError("classifier_loss_error: dimension mismatch");
    }
    const Eigen::VectorXd yhat =
        forward_all(h.w(), h.v(), h.gamma(), m.matrix() * s.points);
    double total = 0.0;
    for (int i = 0; i < s.size(); ++i) {
        const double y = static_cast<double>(s.labels[static_cast<std::size_t>(i)]);
        total += std::min(1.0, spec.lambda * std::abs(yhat[i] - y));
    }
    return total / static_cast<double>(s.size());
}

double net_classification_error(const NetHypothesis& h, const Metric& m,
                                const LabeledDataset& s) {
    check_binary_labels(s, "net_classification_error");
    const Eigen::VectorXd yhat =
        forward_all(h.w(), h.v(), h.gamma(), m.matrix() * s.points);
    int wrong = 0;
    for (int i = 0; i < s.size(); ++i) {
        const int pred = yhat[i] >= 0.5 ? 1 : 0;
        if (pred != s.labels[static_cast<std::size_t>(i)]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(s.size());
}

Eigen::VectorXd l1_ball_project(const Eigen::VectorXd& v, double radius) {
    if (!(radius > 0.0)) throw DataError("l1_ball_project: radius must be > 0");
    const double norm = v.lpNorm<1>();
    if (norm <= radius) return v;
    // Simplex projection of the magnitudes (sort, running-sum threshold),
    // then signs restored. Ties resolve by index order through the stable
    // running-sum scan.
    const Eigen::Index n = v.size();
    std::vector<double> mag(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) mag[static_cast<std::size_t>(i)] = std::abs(v[i]);
    std::vector<double> sorted = mag;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        cumsum += sorted[j];
        const double cand = (cumsum - radius) / static_cast<double>(j + 1);
        if (sorted[j] - cand > 0.0) {
            theta = cand;
        } else {
            break;
        }
    }
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double shrunk = std::max(0.0, mag[static_cast<std::size_t>(i)] - theta);
        out[i] = v[i] >= 0.0 ? shrunk : -shrunk;
    }
    return out;
}

namespace {

struct JointState {
    Eigen::MatrixXd m;
    Eigen::VectorXd w;
    Eigen::MatrixXd v;
    double objective = 0.0;
};

// One descent run from a seeded start. The clipped loss is flat once
// every prediction is badly wrong (lambda |yhat - y| >= 1), so starts
// spread w and the hidden rows over their l1 balls to keep some samples
// on the active slope.
JointState joint_fit_run(const LabeledDataset& s, int hidden_units, double gamma,
                         const LossSpec& spec, double lambda_reg,
                         const FitOptions& opts, std::uint64_t seed) {
    const int d = s.dim();
    const int k = hidden_units;
    const double n = static_cast<double>(s.size());

    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd w(k);
    Eigen::MatrixXd v(k, d);
    SplitMix64 rng(seed);
    for (int i = 0; i < k; ++i) w[i] = rng.next_uniform(-1.0, 1.0);
    w = l1_ball_project(w, 1.0);
    if (w.lpNorm<1>() > 0.0) w /= w.lpNorm<1>();
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < d; ++j) v(i, j) = rng.next_uniform(-1.0, 1.0);
        v.row(i) = l1_ball_project(v.row(i).transpose(), 1.0).transpose();
    }

    const auto eval = [&](const Eigen::MatrixXd& mm, const Eigen::VectorXd& ww,
                          const Eigen::MatrixXd& vv) {
        const Eigen::MatrixXd mapped = mm * s.points;
        const Eigen::VectorXd yhat = forward_all(ww, vv, gamma, mapped);
        double total = 0.0;
        for (int i = 0; i < s.size(); ++i) {
            const double y = static_cast<double>(s.labels[static_cast<std::size_t>(i)]);
            total += std::min(1.0, spec.lambda * std::abs(yhat[i] - y));
        }
        double obj = total / n;
        if (lambda_reg != 0.0) obj += lambda_reg * (mm.transpose() * mm).squaredNorm();
        return obj;
    };

    Eigen::MatrixXd best_m = m;
    Eigen::VectorXd best_w = w;
    Eigen::MatrixXd best_v = v;
    double best_obj = eval(m, w, v);
    double window_best = best_obj;
    int window = 0;

    for (int t = 1; t <= opts.max_iters; ++t) {
        const double step = opts.step0 / std::sqrt(static_cast<double>(t));

        // dphi/dyhat per sample (1/n folded in), zero on the flat and
        // saturated regions of the clipped loss.
        const auto loss_slope = [&](const Eigen::VectorXd& yhat) {
            Eigen::VectorXd dl(s.size());
            for (int i = 0; i < s.size(); ++i) {
                const double y =
                    static_cast<double>(s.labels[static_cast<std::size_t>(i)]);
                const double gap = yhat[i] - y;
                const double scaled = spec.lambda * std::abs(gap);
                dl[i] = (scaled > 0.0 && scaled < 1.0)
                            ? spec.lambda * (gap > 0.0 ? 1.0 : -1.0) / n
                            : 0.0;
            }
            return dl;
        };
        // dObj/dz_(i,s) for z = v_i . (M x_s):
        //   dloss_s * w_i * gamma * sech^2(gamma z) / 2.
        const auto backprop_units = [&](const Eigen::MatrixXd& act,
                                        const Eigen::VectorXd& dloss) {
            return ((1.0 - act.array().square()) * (0.5 * gamma) *
                    (w * dloss.transpose()).array())
                .matrix();
        };

        // Metric step.
        const Eigen::MatrixXd mapped = m * s.points;  // D x n
        const Eigen::MatrixXd act =
            (gamma * (v * mapped)).array().tanh().matrix();  // K x n
        const Eigen::VectorXd yhat =
            (((act.transpose() * w).array() + 1.0) * 0.5).matrix();
        const Eigen::MatrixXd unit_grad = backprop_units(act, loss_slope(yhat));
        Eigen::MatrixXd grad_m = v.transpose() * unit_grad * s.points.transpose();
        if (lambda_reg != 0.0) {
            grad_m.noalias() += (4.0 * lambda_reg) * (m * (m.transpose() * m));
        }
        // Same long-subgradient clipping as the distance-based fit.
        m = spectral_clip(m - (step / std::max(1.0, grad_m.norm())) * grad_m);

        // Network step under the updated metric.
        const Eigen::MatrixXd mapped2 = m * s.points;
        const Eigen::MatrixXd act2 =
            (gamma * (v * mapped2)).array().tanh().matrix();
        const Eigen::VectorXd yhat2 =
            (((act2.transpose() * w).array() + 1.0) * 0.5).matrix();
        const Eigen::VectorXd dloss2 = loss_slope(yhat2);
        const Eigen::VectorXd grad_w = 0.5 * (act2 * dloss2);
        const Eigen::MatrixXd grad_v =
            backprop_units(act2, dloss2) * mapped2.transpose();

        w = l1_ball_project(w - step * grad_w, 1.0);
        Eigen::MatrixXd vnew = v - step * grad_v;
        for (int i = 0; i < k; ++i) {
            v.row(i) = l1_ball_project(vnew.row(i).transpose(), 1.0).transpose();
        }

        const double obj = eval(m, w, v);
        if (!std::isfinite(obj)) throw NumericError("joint_fit: objective diverged");
        if (obj < best_obj) {
            best_obj = obj;
            best_m = m;
            best_w = w;
            best_v = v;
        }
        if (++window >= opts.patience) {
            if (window_best - best_obj < opts.tol) break;
            window_best = best_obj;
            window = 0;
        }
    }
    return {std::move(best_m), std::move(best_w), std::move(best_v), best_obj};
}

}  // namespace

std::pair<Metric, NetHypothesis> joint_fit(const LabeledDataset& s, int hidden_units,
                                           double gamma, const LossSpec& spec,
                                           double lambda_reg, const FitOptions& opts) {
    check_binary_labels(s, "joint_fit");
    if (hidden_units < 1) throw DataError("joint_fit: need at least one hidden unit");
    if (!(gamma > 0.0)) throw DataError("joint_fit: gamma must be > 0");

    // Non-convex objective: a few seeded restarts, best run kept.
    constexpr int kRestarts = 3;
    JointState best;
    for (int r = 0; r < kRestarts; ++r) {
        JointState run = joint_fit_run(s, hidden_units, gamma, spec, lambda_reg, opts,
                                       derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
        if (r == 0 || run.objective < best.objective) best = std::move(run);
    }
    return {Metric(best.m), NetHypothesis(best.w, best.v, gamma)};
}

void save_net(const NetHypothesis& h, std::ostream& out) {
    out << std::setprecision(17);
    out << h.hidden_units() << ' ' << h.dim() << ' ' << h.gamma() << '\n';
    for (int i = 0; i < h.hidden_units(); ++i) {
        if (i) out << ' ';
        out << h.w()[i];
    }
    out << '\n';
    for (int i = 0; i < h.hidden_units(); ++i) {
        for (int j = 0; j < h.dim(); ++j) {
            if (j) out << ' ';
            out << h.v()(i, j);
        }
        out << '\n';
    }
}

void save_net(const NetHypothesis& h, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("save_net: cannot open " + path);
    save_net(h, f);
    if (!f) throw DataError("save_net: write failed for " + path);
}

NetHypothesis load_net(std::istream& in) {
    int k = 0, d = 0;
    double gamma = 0.0;
    if (!(in >> k >> d >> gamma) || k < 1 || d < 1) {
        throw DataError("load_net: bad header line");
    }
    Eigen::VectorXd w(k);
    for (int i = 0; i < k; ++i) {
        if (!(in >> w[i])) throw DataError("load_net: truncated output weights");
    }
    Eigen::MatrixXd v(k, d);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < d; ++j) {
            if (!(in >> v(i, j))) throw DataError("load_net: truncated hidden rows");
        }
    }
    return NetHypothesis(std::move(w), std::move(v), gamma);
}

NetHypothesis load_net(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("load_net: cannot open " + path);
    return load_net(f);
}

}  // namespace metlearn
