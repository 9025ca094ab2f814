#include "metlearn/knn.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "metlearn/errors.hpp"

namespace metlearn {

double knn_error(const Metric& m, const LabeledDataset& train,
                 const LabeledDataset& test, int k) {
    if (train.size() < 1 || test.size() < 1) throw DataError("knn_error: empty set");
    if (train.dim() != m.dim() || test.dim() != m.dim()) {
        throw DataError("knn_error: dimension mismatch");
    }
    if (k < 1 || k > train.size()) {
        throw DataError("knn_error: k must lie in [1, train size]");
    }

    // ||M(x - t)||^2 = ||Mx - Mt||^2, so map both sets once.
    const Eigen::MatrixXd mapped_train = m.matrix() * train.points;
    const Eigen::MatrixXd mapped_test = m.matrix() * test.points;

    const int n = train.size();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::vector<double> dist(static_cast<std::size_t>(n));
    int wrong = 0;

    for (int t = 0; t < test.size(); ++t) {
        for (int i = 0; i < n; ++i) {
            dist[static_cast<std::size_t>(i)] =
                (mapped_train.col(i) - mapped_test.col(t)).squaredNorm();
        }
        std::iota(order.begin(), order.end(), 0);
        std::partial_sort(order.begin(), order.begin() + k, order.end(),
                          [&](int a, int b) {
                              const double da = dist[static_cast<std::size_t>(a)];
                              const double db = dist[static_cast<std::size_t>(b)];
                              return da != db ? da < db : a < b;
                          });

        std::map<int, std::pair<int, double>> votes;  // label -> (count, dist sum)
        for (int j = 0; j < k; ++j) {
            const int idx = order[static_cast<std::size_t>(j)];
            auto& v = votes[train.labels[static_cast<std::size_t>(idx)]];
            v.first += 1;
            v.second += dist[static_cast<std::size_t>(idx)];
        }
        int best_label = -1;
        int best_count = -1;
        double best_sum = std::numeric_limits<double>::infinity();
        for (const auto& [label, v] : votes) {
            const bool wins = v.first > best_count ||
                              (v.first == best_count && v.second < best_sum);
            if (wins) {  // map order makes the final tie-break the smaller label
                best_label = label;
                best_count = v.first;
                best_sum = v.second;
            }
        }
        if (best_label != test.labels[static_cast<std::size_t>(t)]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(test.size());
}

double random_baseline(const LabeledDataset& train, const LabeledDataset& test) {
    if (train.size() < 1 || test.size() < 1) {
        throw DataError("random_baseline: empty set");
    }
    std::map<int, double> p, q;
    for (int y : train.labels) p[y] += 1.0 / train.size();
    for (int y : test.labels) q[y] += 1.0 / test.size();
    double agree = 0.0;
    for (const auto& [label, pc] : p) {
        auto it = q.find(label);
        if (it != q.end()) agree += pc * it->second;
    }
    return 1.0 - agree;
}

}  // namespace metlearn
