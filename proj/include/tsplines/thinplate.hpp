#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tsplines/coupling.hpp"
#include "tsplines/errors.hpp"
#include "tsplines/normal.hpp"

namespace tsplines {

/// Thin-plate kernel phi(r) = r^2 log r, extended continuously by phi(0) = 0.
inline double tps_kernel(double r) {
    return r > 0.0 ? r * r * std::log(r) : 0.0;
}

/// Thin-plate spline over 2D sites:
///   f(x) = c0 + c1 x(1) + c2 x(2) + sum_i alpha_i phi(|x - x_i|)
/// with side conditions P^T alpha = 0.
class ThinPlateSpline {
public:
    ThinPlateSpline(std::vector<Eigen::Vector2d> sites, Eigen::VectorXd rbf,
                    Eigen::Vector3d affine)
        : sites_(std::move(sites)), rbf_(std::move(rbf)), affine_(affine) {}

    [[nodiscard]] const std::vector<Eigen::Vector2d>& sites() const { return sites_; }
    [[nodiscard]] const Eigen::VectorXd& rbf_coefficients() const { return rbf_; }
    [[nodiscard]] const Eigen::Vector3d& affine_coefficients() const { return affine_; }

    [[nodiscard]] double operator()(const Eigen::Vector2d& x) const {
        double f = affine_(0) + affine_(1) * x(0) + affine_(2) * x(1);
        for (std::size_t i = 0; i < sites_.size(); ++i) {
            f += rbf_(static_cast<Eigen::Index>(i)) * tps_kernel((x - sites_[i]).norm());
        }
        return f;
    }

    /// Hessian of the expansion (the affine part drops out). Singular at the
    /// sites themselves; intended for energy quadrature away from them.
    [[nodiscard]] Eigen::Matrix2d hessian(const Eigen::Vector2d& x) const {
        Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
        for (std::size_t i = 0; i < sites_.size(); ++i) {
            const Eigen::Vector2d u = x - sites_[i];
            const double r2 = u.squaredNorm();
            if (r2 <= 0.0) continue;
            const double logr = 0.5 * std::log(r2);
            // phi''(r) = 2 log r + 3, phi'(r)/r = 2 log r + 1
            const double radial = 2.0 * logr + 3.0;
            const double tangential = 2.0 * logr + 1.0;
            const Eigen::Matrix2d proj = u * u.transpose() / r2;
            h += rbf_(static_cast<Eigen::Index>(i)) *
                 (radial * proj + tangential * (Eigen::Matrix2d::Identity() - proj));
        }
        return h;
    }

private:
    std::vector<Eigen::Vector2d> sites_;
    Eigen::VectorXd rbf_;
    Eigen::Vector3d affine_;
};

namespace detail {

inline void check_sites(const std::vector<Eigen::Vector2d>& sites) {
    if (sites.size() < 3) {
        throw LengthMismatch("thin-plate fit needs at least three sites");
    }
    double scale = 0.0;
    for (const auto& s : sites) scale = std::max(scale, s.cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < sites.size(); ++i) {
        for (std::size_t j = i + 1; j < sites.size(); ++j) {
            if ((sites[i] - sites[j]).norm() <= 1e-12 * std::max(1.0, scale)) {
                throw DuplicateSites("thin-plate sites must be pairwise distinct");
            }
        }
    }
}

inline Eigen::MatrixXd polynomial_block(const std::vector<Eigen::Vector2d>& sites) {
    Eigen::MatrixXd p(static_cast<Eigen::Index>(sites.size()), 3);
    for (std::size_t i = 0; i < sites.size(); ++i) {
        p.row(static_cast<Eigen::Index>(i)) << 1.0, sites[i](0), sites[i](1);
    }
    return p;
}

} // namespace detail

/// Fits the thin-plate spline through (x_i, z_i) by solving the dense
/// symmetric-indefinite system L w = b with L = [K P; P^T 0] (LU with
/// partial pivoting; phi is not positive definite, ruling out Cholesky).
inline ThinPlateSpline fit_tps(const std::vector<Eigen::Vector2d>& sites,
                               const Eigen::VectorXd& values) {
    detail::check_sites(sites);
    const Eigen::Index n = static_cast<Eigen::Index>(sites.size());
    if (values.size() != n) {
        throw LengthMismatch("need one value per site");
    }
    if (!values.allFinite()) {
        throw NonFinite("site values must be finite");
    }

    const Eigen::MatrixXd p = detail::polynomial_block(sites);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(p);
    if (svd.singularValues()(2) <= 1e-10 * svd.singularValues()(0)) {
        throw CollinearSites("sites are collinear; the affine block is rank-deficient");
    }

    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n + 3, n + 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double k = tps_kernel((sites[i] - sites[j]).norm());
            l(i, j) = k;
            l(j, i) = k;
        }
    }
    l.block(0, n, n, 3) = p;
    l.block(n, 0, 3, n) = p.transpose();

    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 3);
    b.head(n) = values;

    const Eigen::VectorXd w = Eigen::PartialPivLU<Eigen::MatrixXd>(l).solve(b);
    return ThinPlateSpline(sites, w.head(n), w.tail(3));
}

/// Surface of 1D measures indexed by 2D sites. The Gaussian case carries a
/// mean surface and a standard-deviation surface; the general case carries
/// one surface per quantile level of the module grid.
class MeasureField {
public:
    static MeasureField fit_gaussian(const std::vector<Eigen::Vector2d>& sites,
                                     const std::vector<Gaussian1D>& measures) {
        if (sites.size() != measures.size()) {
            throw LengthMismatch("need one measure per site");
        }
        Eigen::VectorXd means(static_cast<Eigen::Index>(measures.size()));
        Eigen::VectorXd sigmas(static_cast<Eigen::Index>(measures.size()));
        for (std::size_t i = 0; i < measures.size(); ++i) {
            if (!(measures[i].sigma > 0.0)) {
                throw DegenerateSource("site standard deviations must be positive");
            }
            means(static_cast<Eigen::Index>(i)) = measures[i].mean;
            sigmas(static_cast<Eigen::Index>(i)) = measures[i].sigma;
        }
        MeasureField f;
        f.sites_ = sites;
        f.mean_surface_.emplace(fit_tps(sites, means));
        f.std_surface_.emplace(fit_tps(sites, sigmas));
        return f;
    }

    static MeasureField fit_general(const std::vector<Eigen::Vector2d>& sites,
                                    const std::vector<Measure1D>& measures,
                                    std::vector<double> levels = Measure1D::default_levels()) {
        if (sites.size() != measures.size()) {
            throw LengthMismatch("need one measure per site");
        }
        MeasureField f;
        f.sites_ = sites;
        f.levels_ = std::move(levels);
        f.level_surfaces_.reserve(f.levels_.size());
        Eigen::VectorXd z(static_cast<Eigen::Index>(sites.size()));
        for (double u : f.levels_) {
            for (std::size_t i = 0; i < measures.size(); ++i) {
                z(static_cast<Eigen::Index>(i)) = measures[i].quantile(u);
            }
            f.level_surfaces_.push_back(fit_tps(sites, z));
        }
        return f;
    }

    [[nodiscard]] bool is_gaussian() const { return mean_surface_.has_value(); }
    [[nodiscard]] const std::vector<Eigen::Vector2d>& sites() const { return sites_; }

    [[nodiscard]] double mean_at(const Eigen::Vector2d& x) const {
        if (is_gaussian()) return (*mean_surface_)(x);
        // Mean of the interpolated measure: integral of the quantile function.
        return integrate_levels(x, [](double q) { return q; });
    }

    [[nodiscard]] double std_at(const Eigen::Vector2d& x) const {
        if (is_gaussian()) return (*std_surface_)(x);
        const double m = mean_at(x);
        const double second = integrate_levels(x, [](double q) { return q * q; });
        return std::sqrt(std::max(0.0, second - m * m));
    }

    /// The interpolated standard-deviation surface can dip nonpositive
    /// between sites; such points carry a degenerate (point-mass) measure.
    [[nodiscard]] bool degenerate_at(const Eigen::Vector2d& x) const {
        if (is_gaussian()) return (*std_surface_)(x) <= 0.0;
        return !monotone_levels_at(x);
    }

    /// Quantile of the interpolated measure at x. Gaussian case:
    /// m_x + Phi^{-1}(alpha) |s_x|; general case: interpolation of the
    /// per-level surface values.
    [[nodiscard]] double quantile(const Eigen::Vector2d& x, double alpha) const {
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw OutOfRange("quantile level must lie strictly inside (0,1)");
        }
        if (is_gaussian()) {
            if (alpha == 0.5) return (*mean_surface_)(x); // median equals mean
            return (*mean_surface_)(x) + norm_quantile(alpha) * std::abs((*std_surface_)(x));
        }
        if (alpha <= levels_.front()) return level_surfaces_.front()(x);
        if (alpha >= levels_.back()) return level_surfaces_.back()(x);
        const auto it = std::upper_bound(levels_.begin(), levels_.end(), alpha);
        const std::size_t j = static_cast<std::size_t>(it - levels_.begin());
        const double w = (alpha - levels_[j - 1]) / (levels_[j] - levels_[j - 1]);
        return (1.0 - w) * level_surfaces_[j - 1](x) + w * level_surfaces_[j](x);
    }

    /// The interpolated measure at x as quantile samples (general case).
    [[nodiscard]] Measure1D measure_at(const Eigen::Vector2d& x) const {
        if (is_gaussian()) {
            const double s = (*std_surface_)(x);
            return Measure1D::gaussian((*mean_surface_)(x), std::abs(s));
        }
        std::vector<double> values;
        values.reserve(levels_.size());
        for (const auto& surf : level_surfaces_) values.push_back(surf(x));
        return Measure1D::from_quantiles(levels_, std::move(values));
    }

    /// Whether the per-level surface values at x form a valid quantile function.
    [[nodiscard]] bool monotone_levels_at(const Eigen::Vector2d& x) const {
        if (is_gaussian()) return (*std_surface_)(x) > 0.0;
        double prev = level_surfaces_.front()(x);
        double scale = std::max(1.0, std::abs(prev));
        for (std::size_t j = 1; j < level_surfaces_.size(); ++j) {
            const double cur = level_surfaces_[j](x);
            scale = std::max(scale, std::abs(cur));
            if (cur - prev < -1e-9 * scale) return false;
            prev = cur;
        }
        return true;
    }

    [[nodiscard]] const ThinPlateSpline& mean_surface() const { return *mean_surface_; }
    [[nodiscard]] const ThinPlateSpline& std_surface() const { return *std_surface_; }

private:
    MeasureField() = default;

    template <typename F>
    double integrate_levels(const Eigen::Vector2d& x, F&& transform) const {
        // Trapezoidal rule over the level grid, constant-extended to (0,1).
        double acc = 0.0;
        double prev_u = 0.0;
        double prev_q = transform(level_surfaces_.front()(x));
        for (std::size_t j = 0; j < levels_.size(); ++j) {
            const double q = transform(level_surfaces_[j](x));
            acc += 0.5 * (q + prev_q) * (levels_[j] - prev_u);
            prev_u = levels_[j];
            prev_q = q;
        }
        acc += prev_q * (1.0 - prev_u);
        return acc;
    }

    std::vector<Eigen::Vector2d> sites_;
    std::optional<ThinPlateSpline> mean_surface_;
    std::optional<ThinPlateSpline> std_surface_;
    std::vector<double> levels_;
    std::vector<ThinPlateSpline> level_surfaces_;
};

/// Gaussian measure field: thin-plate surfaces through the means and the
/// standard deviations; quantiles then follow in closed form.
inline MeasureField fit_gaussian_field(const std::vector<Eigen::Vector2d>& sites,
                                       const std::vector<Gaussian1D>& measures) {
    return MeasureField::fit_gaussian(sites, measures);
}

/// Quantile of the interpolated field at (x, alpha).
inline double field_quantile(const MeasureField& field, const Eigen::Vector2d& x, double alpha) {
    return field.quantile(x, alpha);
}

} // namespace tsplines
