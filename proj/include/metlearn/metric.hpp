#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

namespace metlearn {

/// A weighting metric: a D x D real matrix M with spectral norm at most 1,
/// inducing the squared distance ||M(x - x')||^2. The spectral cap removes
/// arbitrary scaling; we use the closed ball (sigma_max <= 1) rather than
/// the sphere so that norm-regularized fits may shrink the metric.
class Metric {
public:
    /// Validates squareness, finiteness and the spectral cap
    /// (sigma_max <= 1 + 1e-9).
    explicit Metric(Eigen::MatrixXd m);

    static Metric identity(int dim);
    static Metric zero(int dim);

    const Eigen::MatrixXd& matrix() const { return mat_; }
    int dim() const { return static_cast<int>(mat_.rows()); }

private:
    Eigen::MatrixXd mat_;
};

/// Eigendecomposition of a symmetric matrix, eigenvalues descending,
/// eigenvectors as orthonormal columns aligned with the eigenvalues.
struct Spectrum {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
};

/// Squared weighted distance ||M(x - x')||^2.
double mahalanobis_sq(const Metric& m, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y);

/// Nearest metric under the spectral cap: singular values clipped to
/// min(sigma_i, 1). Identity on matrices already inside the ball.
Metric spectral_project(const Eigen::MatrixXd& a);

/// Same projection on a raw matrix, for optimizer inner loops that only
/// wrap the final iterate in a Metric.
Eigen::MatrixXd spectral_clip(const Eigen::MatrixXd& a);

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& a);

struct FrobeniusComplexity {
    double f2;  ///< ||M^T M||_F^2
    int d;      ///< ceil(f2), clamped to >= 1 so every metric has a class index
};

/// Intrinsic complexity of a metric: the squared Frobenius norm of its
/// quadratic form, and the integer class index it falls into.
FrobeniusComplexity frobenius_complexity(const Metric& m);

/// Symmetric eigendecomposition. Requires ||S - S^T||_F <= 1e-8 ||S||_F.
Spectrum sym_eig(const Eigen::MatrixXd& s);

/// Plain-text serialization: first line D, then D rows of D decimals with
/// 17 significant digits.
void save_metric(const Metric& m, std::ostream& out);
void save_metric(const Metric& m, const std::string& path);
Metric load_metric(std::istream& in);
Metric load_metric(const std::string& path);

}  // namespace metlearn
