#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "tsplines/errors.hpp"

namespace tsplines {

namespace detail {

inline void check_symmetric(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) {
        throw NonSymmetric("matrix is not square");
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
            const double tol = 1e-12 * std::max(1.0, std::abs(m(i, j)));
            if (std::abs(m(i, j) - m(j, i)) > tol) {
                throw NonSymmetric("matrix entries are not symmetric within tolerance");
            }
        }
    }
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

} // namespace detail

/// Symmetric positive semidefinite matrix. Validated on construction:
/// entries symmetric within 1e-12 relative, eigenvalues >= -1e-10.
/// Stored exactly symmetrized.
class SymPsdMatrix {
public:
    explicit SymPsdMatrix(Eigen::MatrixXd m) {
        detail::check_symmetric(m);
        mat_ = detail::symmetrize(m);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat_, Eigen::EigenvaluesOnly);
        min_eig_ = es.eigenvalues().minCoeff();
        if (min_eig_ < -1e-10) {
            throw NotPsd("matrix has eigenvalue below -1e-10");
        }
    }

    [[nodiscard]] Eigen::Index dim() const { return mat_.rows(); }
    [[nodiscard]] const Eigen::MatrixXd& matrix() const { return mat_; }
    [[nodiscard]] double min_eigenvalue() const { return min_eig_; }
    [[nodiscard]] double trace() const { return mat_.trace(); }

    static SymPsdMatrix identity(Eigen::Index d) {
        return SymPsdMatrix(Eigen::MatrixXd::Identity(d, d));
    }

private:
    Eigen::MatrixXd mat_;
    double min_eig_ = 0.0;
};

/// Gaussian measure N(mean, cov) on R^d.
class GaussianMeasure {
public:
    GaussianMeasure(Eigen::VectorXd mean, SymPsdMatrix cov)
        : mean_(std::move(mean)), cov_(std::move(cov)) {
        if (mean_.size() != cov_.dim()) {
            throw DimensionMismatch("mean dimension does not match covariance dimension");
        }
    }

    GaussianMeasure(Eigen::VectorXd mean, Eigen::MatrixXd cov)
        : GaussianMeasure(std::move(mean), SymPsdMatrix(std::move(cov))) {}

    static GaussianMeasure centered(Eigen::MatrixXd cov) {
        SymPsdMatrix c(std::move(cov));
        const Eigen::Index d = c.dim();
        return GaussianMeasure(Eigen::VectorXd::Zero(d), std::move(c));
    }

    static GaussianMeasure scalar(double mean, double variance) {
        Eigen::VectorXd m(1);
        m << mean;
        Eigen::MatrixXd c(1, 1);
        c << variance;
        return GaussianMeasure(std::move(m), std::move(c));
    }

    [[nodiscard]] Eigen::Index dim() const { return mean_.size(); }
    [[nodiscard]] const Eigen::VectorXd& mean() const { return mean_; }
    [[nodiscard]] const SymPsdMatrix& cov() const { return cov_; }
    [[nodiscard]] const Eigen::MatrixXd& cov_matrix() const { return cov_.matrix(); }

    /// Degenerate when the smallest covariance eigenvalue is <= 1e-10.
    [[nodiscard]] bool is_degenerate() const { return cov_.min_eigenvalue() <= 1e-10; }

private:
    Eigen::VectorXd mean_;
    SymPsdMatrix cov_;
};

/// Affine map x -> matrix * x + offset.
class LinearMap {
public:
    LinearMap(Eigen::MatrixXd matrix, Eigen::VectorXd offset)
        : matrix_(std::move(matrix)), offset_(std::move(offset)) {
        if (matrix_.rows() != offset_.size()) {
            throw DimensionMismatch("map matrix rows do not match offset dimension");
        }
    }

    static LinearMap identity(Eigen::Index d) {
        return LinearMap(Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d));
    }

    [[nodiscard]] Eigen::Index dim() const { return matrix_.rows(); }
    [[nodiscard]] const Eigen::MatrixXd& matrix() const { return matrix_; }
    [[nodiscard]] const Eigen::VectorXd& offset() const { return offset_; }

    [[nodiscard]] Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
        if (x.size() != matrix_.cols()) {
            throw DimensionMismatch("map applied to vector of wrong dimension");
        }
        return matrix_ * x + offset_;
    }

    /// this(other(x)).
    [[nodiscard]] LinearMap compose(const LinearMap& other) const {
        return LinearMap(matrix_ * other.matrix_, matrix_ * other.offset_ + offset_);
    }

    [[nodiscard]] LinearMap inverse() const {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(matrix_);
        if (!lu.isInvertible()) {
            throw SingularMatrix("map matrix is not invertible");
        }
        Eigen::MatrixXd inv = lu.inverse();
        return LinearMap(inv, -inv * offset_);
    }

private:
    Eigen::MatrixXd matrix_;
    Eigen::VectorXd offset_;
};

namespace detail {

/// PSD square root of an already-symmetrized matrix; negative eigenvalues clamped to 0.
inline Eigen::MatrixXd sqrtm_psd_raw(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return symmetrize(es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose());
}

} // namespace detail

/// Symmetric PSD square root via eigendecomposition, negative eigenvalues clamped to 0.
inline SymPsdMatrix sqrtm_psd(const SymPsdMatrix& a) {
    return SymPsdMatrix(detail::sqrtm_psd_raw(a.matrix()));
}

/// Monge map between Gaussians: x -> m2 + A (x - m1) with
/// A = S1^{-1/2} (S1^{1/2} S2 S1^{1/2})^{1/2} S1^{-1/2}.
inline LinearMap gaussian_monge_map(const GaussianMeasure& src, const GaussianMeasure& dst) {
    if (src.dim() != dst.dim()) {
        throw DimensionMismatch("source and destination Gaussians have different dimensions");
    }
    if (src.is_degenerate()) {
        throw DegenerateSource("source covariance is degenerate (min eigenvalue <= 1e-10)");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(src.cov_matrix());
    const Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd& q = es.eigenvectors();
    const Eigen::MatrixXd root = detail::symmetrize(
        q * vals.cwiseSqrt().asDiagonal() * q.transpose());
    const Eigen::MatrixXd inv_root = detail::symmetrize(
        q * vals.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose());

    const Eigen::MatrixXd mid =
        detail::sqrtm_psd_raw(detail::symmetrize(root * dst.cov_matrix() * root));
    const Eigen::MatrixXd a = detail::symmetrize(inv_root * mid * inv_root);
    return LinearMap(a, dst.mean() - a * src.mean());
}

/// Bures-Wasserstein distance:
/// W2^2 = |m1 - m2|^2 + tr S1 + tr S2 - 2 tr((S1^{1/2} S2 S1^{1/2})^{1/2}).
inline double bures_wasserstein_distance(const GaussianMeasure& a, const GaussianMeasure& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("measures have different dimensions");
    }
    const Eigen::MatrixXd root_a = detail::sqrtm_psd_raw(a.cov_matrix());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        detail::symmetrize(root_a * b.cov_matrix() * root_a), Eigen::EigenvaluesOnly);
    const double cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double w2sq = (a.mean() - b.mean()).squaredNorm() + a.cov().trace() +
                        b.cov().trace() - 2.0 * cross;
    return std::sqrt(std::max(0.0, w2sq));
}

/// Law of map(X) for X ~ g: N(A m + b, A S A^T), covariance symmetrized.
inline GaussianMeasure pushforward(const LinearMap& map, const GaussianMeasure& g) {
    if (map.matrix().cols() != g.dim()) {
        throw DimensionMismatch("map dimension does not match measure dimension");
    }
    Eigen::MatrixXd cov =
        detail::symmetrize(map.matrix() * g.cov_matrix() * map.matrix().transpose());
    return GaussianMeasure(map(g.mean()), SymPsdMatrix(std::move(cov)));
}

} // namespace tsplines
