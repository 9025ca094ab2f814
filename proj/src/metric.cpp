#include "metlearn/metric.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "metlearn/errors.hpp"

namespace metlearn {

namespace {

constexpr double kSpectralSlack = 1e-9;

void require_finite(const Eigen::MatrixXd& a, const char* who) {
    if (!a.allFinite()) {
        throw NumericError(std::string(who) + ": non-finite entries");
    }
}

}  // namespace

Metric::Metric(Eigen::MatrixXd m) : mat_(std::move(m)) {
    if (mat_.rows() != mat_.cols() || mat_.rows() < 1) {
        throw DataError("Metric: matrix must be square and non-empty");
    }
    require_finite(mat_, "Metric");
    const double s = spectral_norm(mat_);
    if (s > 1.0 + kSpectralSlack) {
        throw DataError("Metric: spectral norm " + std::to_string(s) +
                        " exceeds the unit cap");
    }
}

Metric Metric::identity(int dim) {
    return Metric(Eigen::MatrixXd::Identity(dim, dim));
}

Metric Metric::zero(int dim) {
    return Metric(Eigen::MatrixXd::Zero(dim, dim));
}

double mahalanobis_sq(const Metric& m, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y) {
    if (x.size() != m.dim() || y.size() != m.dim()) {
        throw DataError("mahalanobis_sq: dimension mismatch");
    }
    return (m.matrix() * (x - y)).squaredNorm();
}

double spectral_norm(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.transpose() * a,
                                                      Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    return top > 0.0 ? std::sqrt(top) : 0.0;
}

Eigen::MatrixXd spectral_clip(const Eigen::MatrixXd& a) {
    require_finite(a, "spectral_clip");
    // Gram eigenvalues are squared singular values; nothing to do if all <= 1.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.transpose() * a);
    const Eigen::VectorXd& lam = es.eigenvalues();
    if (lam.maxCoeff() <= 1.0) {
        return a;
    }
    // M = U S V^T  =>  clip via M V diag(min(s,1)/s) V^T, touching only
    // directions with s > 1.
    Eigen::VectorXd scale(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        scale[i] = lam[i] > 1.0 ? 1.0 / std::sqrt(lam[i]) : 1.0;
    }
    const Eigen::MatrixXd& v = es.eigenvectors();
    return a * (v * scale.asDiagonal() * v.transpose());
}

Metric spectral_project(const Eigen::MatrixXd& a) {
    return Metric(spectral_clip(a));
}

FrobeniusComplexity frobenius_complexity(const Metric& m) {
    const Eigen::MatrixXd g = m.matrix().transpose() * m.matrix();
    const double f2 = g.squaredNorm();
    // 1e-9 guard keeps integer-valued f2 from ceiling up on rounding noise.
    int d = static_cast<int>(std::ceil(f2 - 1e-9));
    if (d < 1) d = 1;
    return {f2, d};
}

Spectrum sym_eig(const Eigen::MatrixXd& s) {
    if (s.rows() != s.cols() || s.rows() < 1) {
        throw DataError("sym_eig: matrix must be square and non-empty");
    }
    require_finite(s, "sym_eig");
    const double asym = (s - s.transpose()).norm();
    if (asym > 1e-8 * std::max(s.norm(), 1e-300)) {
        throw DataError("sym_eig: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.info() != Eigen::Success) {
        throw NumericError("sym_eig: eigensolver failed");
    }
    // Eigen returns ascending order; flip to descending.
    Spectrum out;
    out.eigenvalues = es.eigenvalues().reverse();
    out.eigenvectors = es.eigenvectors().rowwise().reverse();
    return out;
}

void save_metric(const Metric& m, std::ostream& out) {
    const int d = m.dim();
    out << d << '\n';
    out << std::setprecision(17);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (j) out << ' ';
            out << m.matrix()(i, j);
        }
        out << '\n';
    }
}

void save_metric(const Metric& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("save_metric: cannot open " + path);
    save_metric(m, f);
    if (!f) throw DataError("save_metric: write failed for " + path);
}

Metric load_metric(std::istream& in) {
    int d = 0;
    if (!(in >> d) || d < 1) {
        throw DataError("load_metric: bad dimension line");
    }
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (!(in >> a(i, j))) {
                throw DataError("load_metric: truncated matrix body");
            }
        }
    }
    return Metric(a);
}

Metric load_metric(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("load_metric: cannot open " + path);
    return load_metric(f);
}

}  // namespace metlearn
