#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tsplines/bures.hpp"
#include "tsplines/errors.hpp"
#include "tsplines/normal.hpp"

namespace tsplines {

/// One-dimensional measure represented by quantile-function samples on a
/// fixed grid of probability levels, with closed-form overrides for
/// Gaussian and uniform measures.
class Measure1D {
public:
    enum class Tag { Grid, Gaussian, Uniform };

    static Measure1D gaussian(double mean, double sigma) {
        Measure1D m;
        m.tag_ = Tag::Gaussian;
        m.p1_ = mean;
        m.p2_ = sigma;
        return m;
    }

    static Measure1D uniform(double a, double b) {
        if (!(a < b)) {
            throw NotIncreasing("uniform support must satisfy a < b");
        }
        Measure1D m;
        m.tag_ = Tag::Uniform;
        m.p1_ = a;
        m.p2_ = b;
        return m;
    }

    static Measure1D from_quantiles(std::vector<double> levels, std::vector<double> values) {
        if (levels.size() != values.size() || levels.size() < 2) {
            throw LengthMismatch("quantile grid needs matching levels and values, at least two");
        }
        for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
            if (!(levels[k] < levels[k + 1])) {
                throw NotIncreasing("quantile levels must be strictly increasing");
            }
        }
        if (!(levels.front() > 0.0 && levels.back() < 1.0)) {
            throw OutOfRange("quantile levels must lie strictly inside (0,1)");
        }
        double scale = std::max(std::abs(values.front()), std::abs(values.back()));
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            if (!std::isfinite(values[k]) || values[k + 1] - values[k] < -1e-12 * std::max(1.0, scale)) {
                throw NotIncreasing("quantile values must be nondecreasing and finite");
            }
        }
        Measure1D m;
        m.tag_ = Tag::Grid;
        m.levels_ = std::move(levels);
        m.values_ = std::move(values);
        return m;
    }

    /// Default module grid: 1024 Chebyshev-like levels clustered near 0 and 1.
    static const std::vector<double>& default_levels() {
        static const std::vector<double> levels = [] {
            constexpr int k = 1024;
            std::vector<double> u(k);
            for (int i = 0; i < k; ++i) {
                u[static_cast<std::size_t>(i)] =
                    0.5 * (1.0 - std::cos(std::numbers::pi * (i + 0.5) / k));
            }
            return u;
        }();
        return levels;
    }

    [[nodiscard]] Tag tag() const { return tag_; }
    [[nodiscard]] double param1() const { return p1_; }
    [[nodiscard]] double param2() const { return p2_; }

    /// Quantile F^dagger(u). Closed-form tags evaluate analytically; grid
    /// representations use monotone linear interpolation, clamped at the ends.
    [[nodiscard]] double quantile(double u) const {
        if (!(u > 0.0 && u < 1.0)) {
            throw OutOfRange("quantile level must lie strictly inside (0,1)");
        }
        switch (tag_) {
            case Tag::Gaussian:
                return p1_ + p2_ * norm_quantile(u);
            case Tag::Uniform:
                return p1_ + (p2_ - p1_) * u;
            case Tag::Grid:
                break;
        }
        if (u <= levels_.front()) return values_.front();
        if (u >= levels_.back()) return values_.back();
        const auto it = std::upper_bound(levels_.begin(), levels_.end(), u);
        const std::size_t j = static_cast<std::size_t>(it - levels_.begin());
        const double w = (u - levels_[j - 1]) / (levels_[j] - levels_[j - 1]);
        return values_[j - 1] + w * (values_[j] - values_[j - 1]);
    }

    /// CDF F(z), the monotone inverse of the quantile representation.
    /// Output is kept strictly inside (0,1) so composed quantiles stay finite.
    [[nodiscard]] double cdf(double z) const {
        double u;
        switch (tag_) {
            case Tag::Gaussian:
                u = norm_cdf((z - p1_) / p2_);
                break;
            case Tag::Uniform:
                u = (z - p1_) / (p2_ - p1_);
                break;
            case Tag::Grid: {
                if (z <= values_.front()) {
                    u = levels_.front();
                } else if (z >= values_.back()) {
                    u = levels_.back();
                } else {
                    const auto it = std::upper_bound(values_.begin(), values_.end(), z);
                    const std::size_t j = static_cast<std::size_t>(it - values_.begin());
                    const double gap = values_[j] - values_[j - 1];
                    const double w = gap > 0.0 ? (z - values_[j - 1]) / gap : 1.0;
                    u = levels_[j - 1] + w * (levels_[j] - levels_[j - 1]);
                }
                break;
            }
        }
        constexpr double lo = 1e-300;
        const double hi = std::nextafter(1.0, 0.0);
        return std::clamp(u, lo, hi);
    }

    /// Quantile values at the given levels.
    [[nodiscard]] Eigen::VectorXd quantiles_at(const std::vector<double>& levels) const {
        Eigen::VectorXd q(static_cast<Eigen::Index>(levels.size()));
        for (std::size_t k = 0; k < levels.size(); ++k) {
            q(static_cast<Eigen::Index>(k)) = quantile(levels[k]);
        }
        return q;
    }

    /// True when the quantile representation is strictly increasing (absolute
    /// continuity proxy). Grid measures check consecutive gaps on their grid.
    [[nodiscard]] bool strictly_increasing() const {
        switch (tag_) {
            case Tag::Gaussian:
                return p2_ > 0.0;
            case Tag::Uniform:
                return p2_ > p1_;
            case Tag::Grid:
                break;
        }
        const double scale = std::max(1.0, std::abs(values_.back() - values_.front()));
        for (std::size_t k = 0; k + 1 < values_.size(); ++k) {
            if (values_[k + 1] - values_[k] <= 1e-12 * scale) return false;
        }
        return true;
    }

private:
    Measure1D() = default;

    Tag tag_ = Tag::Grid;
    double p1_ = 0.0, p2_ = 1.0;
    std::vector<double> levels_, values_;
};

/// Monotone transport map z -> F_dst^dagger(F_src(z)) between 1D measures.
class Monotone1DMap {
public:
    Monotone1DMap(Measure1D src, Measure1D dst) : src_(std::move(src)), dst_(std::move(dst)) {
        if (!src_.strictly_increasing()) {
            throw NotIncreasing("source quantile values have ties; measure is not absolutely continuous");
        }
    }

    [[nodiscard]] double operator()(double z) const { return dst_.quantile(src_.cdf(z)); }

    [[nodiscard]] const Measure1D& source() const { return src_; }
    [[nodiscard]] const Measure1D& destination() const { return dst_; }

private:
    Measure1D src_, dst_;
};

/// Monge map between 1D measures via quantile composition.
inline Monotone1DMap quantile_monge_map_1d(const Measure1D& src, const Measure1D& dst) {
    return Monotone1DMap(src, dst);
}

/// Simultaneously optimal coupling of 1D measures at probability level u:
/// the vector (F_0^dagger(u), ..., F_N^dagger(u)).
inline std::vector<double> simultaneous_quantile_coupling(const std::vector<Measure1D>& measures,
                                                          double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw OutOfRange("coupling level must lie strictly inside (0,1)");
    }
    std::vector<double> out;
    out.reserve(measures.size());
    for (const auto& m : measures) out.push_back(m.quantile(u));
    return out;
}

/// Chain of Monge maps between consecutive Gaussian observations.
using GaussianCouplingChain = std::vector<LinearMap>;

inline GaussianCouplingChain sequential_gaussian_coupling(
    const std::vector<GaussianMeasure>& measures) {
    if (measures.size() < 2) {
        throw LengthMismatch("need at least two measures to couple");
    }
    for (const auto& g : measures) {
        if (g.is_degenerate()) {
            throw DegenerateSource("all measures in a sequential coupling must be non-degenerate");
        }
    }
    GaussianCouplingChain chain;
    chain.reserve(measures.size() - 1);
    for (std::size_t i = 1; i < measures.size(); ++i) {
        chain.push_back(gaussian_monge_map(measures[i - 1], measures[i]));
    }
    return chain;
}

/// Uniformly weighted point cloud, one point per row.
class PointCloud {
public:
    explicit PointCloud(Eigen::MatrixXd points) : pts_(std::move(points)) {
        if (pts_.rows() < 1) {
            throw LengthMismatch("point cloud needs at least one point");
        }
        if (!pts_.allFinite()) {
            throw NonFinite("point cloud entries must be finite");
        }
    }

    [[nodiscard]] Eigen::Index size() const { return pts_.rows(); }
    [[nodiscard]] Eigen::Index dim() const { return pts_.cols(); }
    [[nodiscard]] const Eigen::MatrixXd& points() const { return pts_; }
    [[nodiscard]] Eigen::VectorXd point(Eigen::Index k) const { return pts_.row(k); }

private:
    Eigen::MatrixXd pts_;
};

namespace detail {

/// Exact linear assignment by shortest augmenting paths with potentials
/// (Jonker-Volgenant style), O(n^3). Returns the column assigned to each row.
/// Columns are 1-based internally; column 0 is the virtual start of each path.
inline std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> row_of(n + 1, 0); // row currently matched to each column
    std::vector<int> way(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        row_of[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = row_of[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of[j0] != 0);
        do {
            const int j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> perm(n);
    for (int j = 1; j <= n; ++j) perm[row_of[j] - 1] = j - 1;
    return perm;
}

} // namespace detail

/// Optimal matching between equal-size clouds under squared Euclidean cost.
/// Returns the permutation sigma minimizing sum_k |src_k - dst_{sigma(k)}|^2.
inline std::vector<int> assignment_coupling(const PointCloud& src, const PointCloud& dst) {
    if (src.size() != dst.size()) {
        throw SizeMismatch("clouds must have the same number of points");
    }
    if (src.dim() != dst.dim()) {
        throw DimensionMismatch("clouds must live in the same dimension");
    }
    const Eigen::Index n = src.size();
    Eigen::MatrixXd cost(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            cost(i, j) = (src.points().row(i) - dst.points().row(j)).squaredNorm();
        }
    }
    return detail::solve_assignment(cost);
}

/// Cost of a matching under squared Euclidean distance.
inline double assignment_cost(const PointCloud& src, const PointCloud& dst,
                              const std::vector<int>& perm) {
    double total = 0.0;
    for (int k = 0; k < src.size(); ++k) {
        total += (src.points().row(k) - dst.points().row(perm[k])).squaredNorm();
    }
    return total;
}

} // namespace tsplines
