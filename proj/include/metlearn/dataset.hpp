#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "metlearn/errors.hpp"

namespace metlearn {

/// Labeled observations, one column per point. Labels are dense integer
/// class ids in first-appearance order of the source file.
struct LabeledDataset {
    Eigen::MatrixXd points;   // D x n
    std::vector<int> labels;  // n
    std::string name;

    int dim() const { return static_cast<int>(points.rows()); }
    int size() const { return static_cast<int>(points.cols()); }
    int num_classes() const;

    /// Largest Euclidean norm over the points (the support bound B).
    double support_bound() const;
};

struct SplitSpec {
    double train_frac = 0.7;
    double val_frac = 0.1;
    double test_frac = 0.2;
    std::uint64_t seed = 0;
};

struct Split {
    LabeledDataset train;
    LabeledDataset val;
    LabeledDataset test;
};

/// Parses a CSV of decimal features with one label column (negative index
/// counts from the end; -1 = last). Throws DataError on empty files,
/// ragged rows (naming the line) and non-numeric features.
LabeledDataset load_csv(const std::string& path, bool has_header, int label_column);

/// Writes the dataset back out as CSV, label last.
void save_csv(const LabeledDataset& ds, const std::string& path);

/// Unit-scale Wishart draw: A^T A for A a D x D matrix of iid standard
/// normals. Symmetric positive semi-definite.
Eigen::MatrixXd wishart_covariance(int dim, std::uint64_t seed);

/// A factor C with C C^T = sigma: Cholesky when positive definite, else
/// eigendecomposition with negative eigenvalues clamped to zero.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& sigma);

/// Appends to every point an independent noise draw from N(0, sigma).
/// Labels are unchanged; the dimension grows by sigma's size. An empty
/// sigma returns the dataset untouched.
LabeledDataset augment_noise(const LabeledDataset& ds, const Eigen::MatrixXd& sigma,
                             std::uint64_t seed);

/// Thrown by split() when a part ends up without one of the classes;
/// callers retry with a fresh seed.
class SplitClassLoss : public DataError {
public:
    explicit SplitClassLoss(const std::string& what) : DataError(what) {}
};

/// Random 70/10/20 split: a seeded uniform permutation sliced into
/// floor(train_frac n) / floor(val_frac n) / remainder.
Split split(const LabeledDataset& ds, const SplitSpec& spec);

/// Reorders the dataset by a seeded uniform permutation.
LabeledDataset shuffled(const LabeledDataset& ds, std::uint64_t seed);

/// Subset by column indices.
LabeledDataset take(const LabeledDataset& ds, const std::vector<int>& idx);

}  // namespace metlearn
