#include "metlearn/hardness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "metlearn/complexity.hpp"
#include "metlearn/errors.hpp"
#include "metlearn/parallel.hpp"
#include "metlearn/rng.hpp"

namespace metlearn {

Eigen::MatrixXd simplex_vertices(int n) {
    if (n < 1) throw DataError("simplex_vertices: n must be >= 1");
    const double nd = static_cast<double>(n);
    const double root_n = std::sqrt(nd);
    const double root_np1 = std::sqrt(nd + 1.0);
    Eigen::MatrixXd v(n, n + 1);
    v.col(0).setConstant(-1.0 / root_n);
    const double diag = ((nd - 1.0) * root_np1 + 1.0) / (nd * root_n);
    const double off = -(root_np1 - 1.0) / (nd * root_n);
    for (int i = 1; i <= n; ++i) {
        v.col(i).setConstant(off);
        v(i - 1, i) = diag;
    }
    return v;
}

double centroid_gap(int n, int k) {
    if (n < 1) throw DataError("centroid_gap: n must be >= 1");
    if (k < 1 || k > n) throw DataError("centroid_gap: k must lie in [1, n]");
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    return (nd + 1.0) * (nd + 1.0) / (kd * nd * (nd + 1.0 - kd));
}

SimplexDistribution::SimplexDistribution(int dim_, double alpha_,
                                         std::vector<std::uint8_t> p_)
    : dim(dim_), alpha(alpha_), p(std::move(p_)) {
    if (dim < 1) throw DataError("SimplexDistribution: dim must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DataError("SimplexDistribution: alpha must lie in (0, 1)");
    }
    if (p.size() != static_cast<std::size_t>(dim + 1)) {
        throw DataError("SimplexDistribution: p must have dim + 1 bits");
    }
    vertices = simplex_vertices(dim);
}

namespace {

double label_one_probability(const SimplexDistribution& dist, int vertex) {
    const double bias = std::sqrt(dist.alpha);
    return dist.p[static_cast<std::size_t>(vertex)] ? (1.0 + bias) / 2.0
                                                    : (1.0 - bias) / 2.0;
}

}  // namespace

LabeledDataset adversarial_sample(const SimplexDistribution& dist, int m,
                                  std::uint64_t seed) {
    if (m < 1) throw DataError("adversarial_sample: m must be >= 1");
    SplitMix64 rng(seed);
    LabeledDataset ds;
    ds.points.resize(dist.dim, m);
    ds.labels.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const int vertex = static_cast<int>(rng.next_below(
            static_cast<std::uint64_t>(dist.dim + 1)));
        ds.points.col(i) = dist.vertices.col(vertex);
        ds.labels.push_back(rng.next_double() < label_one_probability(dist, vertex)
                                ? 1
                                : 0);
    }
    ds.name = "adversarial";
    return ds;
}

Metric bayes_optimal_metric(const std::vector<std::uint8_t>& p,
                            const Eigen::MatrixXd& vertices) {
    const int count = static_cast<int>(vertices.cols());
    if (static_cast<int>(p.size()) != count) {
        throw DataError("bayes_optimal_metric: p does not match vertex count");
    }
    const int dim = static_cast<int>(vertices.rows());
    Eigen::VectorXd mean0 = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd mean1 = Eigen::VectorXd::Zero(dim);
    int n0 = 0, n1 = 0;
    for (int i = 0; i < count; ++i) {
        if (p[static_cast<std::size_t>(i)]) {
            mean1 += vertices.col(i);
            ++n1;
        } else {
            mean0 += vertices.col(i);
            ++n0;
        }
    }
    if (n0 == 0 || n1 == 0) return Metric::zero(dim);
    const Eigen::VectorXd gap = mean1 / n1 - mean0 / n0;
    const Eigen::VectorXd a = gap / gap.norm();
    return Metric(a * a.transpose());
}

LossSpec hardness_loss(int dim) {
    if (dim < 1) throw DataError("hardness_loss: dim must be >= 1");
    return LossSpec(static_cast<double>(dim) / 4.0, 0.0, 4.0 / static_cast<double>(dim));
}

double exact_distance_risk(const Eigen::MatrixXd& m, const SimplexDistribution& dist,
                           const LossSpec& spec) {
    const int count = dist.dim + 1;
    if (m.rows() != dist.dim || m.cols() != dist.dim) {
        throw DataError("exact_distance_risk: dimension mismatch");
    }
    const Eigen::MatrixXd mapped = m * dist.vertices;
    Eigen::VectorXd prob_one(count);
    for (int i = 0; i < count; ++i) prob_one[i] = label_one_probability(dist, i);

    // Two iid draws; vertices uniform, so each ordered (i, j) has mass
    // 1/(D+1)^2 and the label agreement probability factorizes.
    double risk = 0.0;
    for (int i = 0; i < count; ++i) {
        for (int j = 0; j < count; ++j) {
            const double rho = (mapped.col(i) - mapped.col(j)).squaredNorm();
            const double agree =
                prob_one[i] * prob_one[j] + (1.0 - prob_one[i]) * (1.0 - prob_one[j]);
            risk += agree * pair_loss(spec, rho, true) +
                    (1.0 - agree) * pair_loss(spec, rho, false);
        }
    }
    return risk / (static_cast<double>(count) * static_cast<double>(count));
}

double coin_failure_bound(double eps, int m) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw DataError("coin_failure_bound: eps must lie in (0, 1)");
    }
    if (m < 1) throw DataError("coin_failure_bound: m must be >= 1");
    const double half = std::ceil(static_cast<double>(m) / 2.0);
    const double e2 = eps * eps;
    const double inner = std::exp(-2.0 * half * e2 / (1.0 - e2));
    return 0.25 * (1.0 - std::sqrt(1.0 - inner));
}

double coin_mc_failure(double eps, int m, int trials, std::uint64_t seed) {
    if (!(eps >= 0.0 && eps < 1.0)) {
        throw DataError("coin_mc_failure: eps must lie in [0, 1)");
    }
    if (m < 1) throw DataError("coin_mc_failure: m must be >= 1");
    if (trials < 1000) throw DataError("coin_mc_failure: need at least 1000 trials");
    int failures = 0;
    for (int t = 0; t < trials; ++t) {
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        const bool plus = rng.next_u64() & 1;
        const double bias = 0.5 + (plus ? eps / 2.0 : -eps / 2.0);
        int heads = 0;
        for (int i = 0; i < m; ++i) heads += rng.next_double() < bias ? 1 : 0;
        bool guess_plus;
        if (2 * heads > m) {
            guess_plus = true;
        } else if (2 * heads < m) {
            guess_plus = false;
        } else {
            guess_plus = rng.next_u64() & 1;  // tie: uniform
        }
        failures += guess_plus != plus ? 1 : 0;
    }
    return static_cast<double>(failures) / static_cast<double>(trials);
}

namespace {

struct GroupedPairs {
    PairedSample sample;
    std::vector<std::uint8_t> majority;  // empirical majority label per vertex
};

// Draws 2m observations, pairs them consecutively, and collapses the
// pairs onto the (vertex, vertex, agreement) groups of the finite
// support. Weights carry the multiplicities, so fitting cost depends on
// the support size rather than on m.
GroupedPairs sample_grouped_pairs(const SimplexDistribution& dist, int m,
                                  std::uint64_t seed) {
    SplitMix64 rng(seed);
    const int count = dist.dim + 1;
    std::vector<int> ones(static_cast<std::size_t>(count), 0);
    std::vector<int> totals(static_cast<std::size_t>(count), 0);
    std::map<std::tuple<int, int, bool>, int> groups;
    for (int i = 0; i < m; ++i) {
        int vertex[2];
        int label[2];
        for (int s = 0; s < 2; ++s) {
            vertex[s] = static_cast<int>(
                rng.next_below(static_cast<std::uint64_t>(count)));
            label[s] =
                rng.next_double() < label_one_probability(dist, vertex[s]) ? 1 : 0;
            ones[static_cast<std::size_t>(vertex[s])] += label[s];
            totals[static_cast<std::size_t>(vertex[s])] += 1;
        }
        const auto key = std::make_tuple(std::min(vertex[0], vertex[1]),
                                         std::max(vertex[0], vertex[1]),
                                         label[0] == label[1]);
        groups[key] += 1;
    }

    Eigen::MatrixXd diffs(dist.dim, static_cast<Eigen::Index>(groups.size()));
    std::vector<std::uint8_t> same;
    Eigen::VectorXd weights(static_cast<Eigen::Index>(groups.size()));
    Eigen::Index col = 0;
    for (const auto& [key, n] : groups) {
        diffs.col(col) = dist.vertices.col(std::get<0>(key)) -
                         dist.vertices.col(std::get<1>(key));
        same.push_back(std::get<2>(key) ? 1 : 0);
        weights[col] = static_cast<double>(n);
        ++col;
    }

    std::vector<std::uint8_t> majority(static_cast<std::size_t>(count), 0);
    for (int i = 0; i < count; ++i) {
        majority[static_cast<std::size_t>(i)] =
            2 * ones[static_cast<std::size_t>(i)] > totals[static_cast<std::size_t>(i)]
                ? 1
                : 0;
    }
    return {PairedSample(std::move(diffs), std::move(same), std::move(weights)),
            std::move(majority)};
}

}  // namespace

std::vector<LowerboundRow> lowerbound_experiment(const LowerboundOptions& opts) {
    if (opts.m_grid.empty()) throw DataError("lowerbound_experiment: empty m grid");
    for (int m : opts.m_grid) {
        if (m < 1) throw DataError("lowerbound_experiment: sample sizes must be >= 1");
    }
    if (opts.trials < 1) throw DataError("lowerbound_experiment: trials must be >= 1");

    const LossSpec spec = hardness_loss(opts.D);
    std::vector<LowerboundRow> rows;
    rows.reserve(opts.m_grid.size());

    for (std::size_t mi = 0; mi < opts.m_grid.size(); ++mi) {
        const int m = opts.m_grid[mi];

        // One majority-label vector per sample size; trials vary the draw.
        SplitMix64 prng(derive_seed(opts.seed, mi, 0x9f));
        std::vector<std::uint8_t> p(static_cast<std::size_t>(opts.D + 1));
        for (auto& bit : p) bit = prng.next_u64() & 1;
        const SimplexDistribution dist(opts.D, opts.alpha, p);
        const Metric optimal = bayes_optimal_metric(p, dist.vertices);
        const double optimal_risk =
            exact_distance_risk(optimal.matrix(), dist, spec);

        std::vector<std::uint8_t> failed(static_cast<std::size_t>(opts.trials), 0);
        parallel_for(static_cast<std::size_t>(opts.trials), [&](std::size_t trial) {
            const auto grouped = sample_grouped_pairs(
                dist, m, derive_seed(opts.seed, mi, 1 + trial));

            const Eigen::MatrixXd id =
                Eigen::MatrixXd::Identity(opts.D, opts.D);
            const Metric warm = bayes_optimal_metric(grouped.majority, dist.vertices);
            const Eigen::MatrixXd starts[] = {id, 1e-3 * id, warm.matrix()};

            double best_err = std::numeric_limits<double>::infinity();
            Eigen::MatrixXd best;
            for (const auto& start : starts) {
                const Metric fitted =
                    erm_fit_from(start, grouped.sample, spec, 0.0, opts.fit);
                const double err =
                    empirical_distance_error(fitted, grouped.sample, spec);
                if (err < best_err) {
                    best_err = err;
                    best = fitted.matrix();
                }
            }
            const double excess =
                exact_distance_risk(best, dist, spec) - optimal_risk;
            failed[trial] = excess > opts.eps ? 1 : 0;
        });

        LowerboundRow row;
        row.D = opts.D;
        row.alpha = opts.alpha;
        row.m = m;
        row.trials = opts.trials;
        row.failure_fraction =
            static_cast<double>(std::count(failed.begin(), failed.end(), 1)) /
            static_cast<double>(opts.trials);
        // Reported for reference at the experiment's eps, which may sit
        // outside the strict domain of hardness_sample_threshold.
        row.threshold_m =
            static_cast<double>(opts.D + 1) / (512.0 * opts.eps * opts.eps);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace metlearn
