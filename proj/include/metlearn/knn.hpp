#pragma once

#include "metlearn/dataset.hpp"
#include "metlearn/metric.hpp"

namespace metlearn {

/// k-nearest-neighbor 0/1 error of the test set against the training set
/// under the weighted distance ||M(x - x')||^2. Distance ties resolve by
/// training index; vote ties by the smaller summed distance, then by the
/// smaller label id.
double knn_error(const Metric& m, const LabeledDataset& train,
                 const LabeledDataset& test, int k);

/// Expected 0/1 error of labels drawn iid from the training class
/// proportions: 1 - sum_c p_c q_c with p the train and q the test
/// proportions (closed form, no sampling).
double random_baseline(const LabeledDataset& train, const LabeledDataset& test);

}  // namespace metlearn
