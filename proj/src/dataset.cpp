#include "metlearn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "metlearn/errors.hpp"
#include "metlearn/rng.hpp"

namespace metlearn {

int LabeledDataset::num_classes() const {
    std::set<int> ids(labels.begin(), labels.end());
    return static_cast<int>(ids.size());
}

double LabeledDataset::support_bound() const {
    double b = 0.0;
    for (int i = 0; i < size(); ++i) b = std::max(b, points.col(i).norm());
    return b;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

}  // namespace

LabeledDataset load_csv(const std::string& path, bool has_header, int label_column) {
    std::ifstream f(path);
    if (!f) throw DataError("load_csv: cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::vector<std::string> label_strings;
    std::size_t width = 0;
    std::size_t line_no = 0;
    std::string line;
    bool skipped_header = false;

    while (std::getline(f, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (has_header && !skipped_header) {
            skipped_header = true;
            continue;
        }
        const auto fields = split_fields(line);
        if (width == 0) {
            width = fields.size();
            if (width < 2) {
                throw DataError("load_csv: line " + std::to_string(line_no) +
                                " has fewer than 2 fields");
            }
        } else if (fields.size() != width) {
            throw DataError("load_csv: ragged row at line " + std::to_string(line_no) +
                            " (expected " + std::to_string(width) + " fields, got " +
                            std::to_string(fields.size()) + ")");
        }
        int lcol = label_column < 0 ? static_cast<int>(width) + label_column
                                    : label_column;
        if (lcol < 0 || lcol >= static_cast<int>(width)) {
            throw DataError("load_csv: label column out of range");
        }
        std::vector<double> feats;
        feats.reserve(width - 1);
        for (std::size_t j = 0; j < width; ++j) {
            if (static_cast<int>(j) == lcol) {
                label_strings.push_back(trim(fields[j]));
                continue;
            }
            const std::string v = trim(fields[j]);
            std::size_t used = 0;
            double x = 0.0;
            try {
                x = std::stod(v, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != v.size() || v.empty()) {
                throw DataError("load_csv: non-numeric feature '" + v + "' at line " +
                                std::to_string(line_no));
            }
            feats.push_back(x);
        }
        rows.push_back(std::move(feats));
    }
    if (rows.empty()) throw DataError("load_csv: no data rows in " + path);

    // Dense ids in first-appearance order.
    std::unordered_map<std::string, int> id_of;
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (const auto& s : label_strings) {
        auto [it, inserted] = id_of.try_emplace(s, static_cast<int>(id_of.size()));
        labels.push_back(it->second);
    }

    LabeledDataset ds;
    ds.points.resize(static_cast<Eigen::Index>(rows[0].size()),
                     static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            ds.points(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                rows[i][j];
        }
    }
    ds.labels = std::move(labels);
    ds.name = path;
    return ds;
}

void save_csv(const LabeledDataset& ds, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("save_csv: cannot open " + path);
    f << std::setprecision(17);
    for (int i = 0; i < ds.size(); ++i) {
        for (int j = 0; j < ds.dim(); ++j) f << ds.points(j, i) << ',';
        f << ds.labels[static_cast<std::size_t>(i)] << '\n';
    }
    if (!f) throw DataError("save_csv: write failed for " + path);
}

Eigen::MatrixXd wishart_covariance(int dim, std::uint64_t seed) {
    if (dim < 1) throw DataError("wishart_covariance: dimension must be >= 1");
    SplitMix64 rng(seed);
    Eigen::MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) a(i, j) = rng.next_normal();
    }
    return a.transpose() * a;
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != sigma.cols()) throw DataError("psd_factor: matrix not square");
    if (sigma.size() == 0) return sigma;
    const double scale = std::max(sigma.norm(), 1e-300);
    if ((sigma - sigma.transpose()).norm() > 1e-8 * scale) {
        throw DataError("psd_factor: matrix not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    // Semi-definite or slightly indefinite from rounding: eigen route.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    const Eigen::VectorXd& lam = es.eigenvalues();
    if (lam.minCoeff() < -1e-8 * scale) {
        throw DataError("psd_factor: matrix has a significantly negative eigenvalue");
    }
    return es.eigenvectors() * lam.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

LabeledDataset augment_noise(const LabeledDataset& ds, const Eigen::MatrixXd& sigma,
                             std::uint64_t seed) {
    const int dn = static_cast<int>(sigma.rows());
    if (dn == 0) return ds;
    const Eigen::MatrixXd c = psd_factor(sigma);
    SplitMix64 rng(seed);
    LabeledDataset out;
    out.points.resize(ds.dim() + dn, ds.size());
    out.points.topRows(ds.dim()) = ds.points;
    Eigen::VectorXd g(dn);
    for (int i = 0; i < ds.size(); ++i) {
        for (int j = 0; j < dn; ++j) g[j] = rng.next_normal();
        out.points.col(i).tail(dn) = c * g;
    }
    out.labels = ds.labels;
    out.name = ds.name;
    return out;
}

Split split(const LabeledDataset& ds, const SplitSpec& spec) {
    if (std::abs(spec.train_frac + spec.val_frac + spec.test_frac - 1.0) > 1e-12) {
        throw DataError("split: fractions must sum to 1");
    }
    const int n = ds.size();
    if (n < 10) throw DataError("split: need at least 10 points");

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    SplitMix64 rng(spec.seed);
    rng.shuffle(perm);

    const int n_train = static_cast<int>(std::floor(spec.train_frac * n));
    const int n_val = static_cast<int>(std::floor(spec.val_frac * n));

    Split out;
    out.train = take(ds, {perm.begin(), perm.begin() + n_train});
    out.val = take(ds, {perm.begin() + n_train, perm.begin() + n_train + n_val});
    out.test = take(ds, {perm.begin() + n_train + n_val, perm.end()});

    const int k = ds.num_classes();
    for (const LabeledDataset* part : {&out.train, &out.val, &out.test}) {
        if (part->num_classes() != k) {
            throw SplitClassLoss("split: a part lost a class entirely; reseed");
        }
    }
    return out;
}

LabeledDataset shuffled(const LabeledDataset& ds, std::uint64_t seed) {
    std::vector<int> perm(static_cast<std::size_t>(ds.size()));
    std::iota(perm.begin(), perm.end(), 0);
    SplitMix64 rng(seed);
    rng.shuffle(perm);
    return take(ds, perm);
}

LabeledDataset take(const LabeledDataset& ds, const std::vector<int>& idx) {
    LabeledDataset out;
    out.points.resize(ds.dim(), static_cast<Eigen::Index>(idx.size()));
    out.labels.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.points.col(static_cast<Eigen::Index>(i)) = ds.points.col(idx[i]);
        out.labels.push_back(ds.labels[static_cast<std::size_t>(idx[i])]);
    }
    out.name = ds.name;
    return out;
}

}  // namespace metlearn
