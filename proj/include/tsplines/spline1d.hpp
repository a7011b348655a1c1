#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tsplines/errors.hpp"

namespace tsplines {

/// Strictly increasing knot times. Derived quantities: interval lengths
/// delta_i = t_i - t_{i-1}, max interval delta, mesh ratio alpha = min/max.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> knots) : knots_(std::move(knots)) {
        if (knots_.size() < 2) {
            throw LengthMismatch("grid needs at least two knots");
        }
        for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
            if (!std::isfinite(knots_[i]) || !(knots_[i] < knots_[i + 1])) {
                throw NotIncreasing("grid knots must be finite and strictly increasing");
            }
        }
        if (!std::isfinite(knots_.back())) {
            throw NonFinite("grid knots must be finite");
        }
    }

    /// Number of intervals N (knots are t_0 .. t_N).
    [[nodiscard]] int intervals() const { return static_cast<int>(knots_.size()) - 1; }
    [[nodiscard]] int size() const { return static_cast<int>(knots_.size()); }
    [[nodiscard]] double knot(int i) const { return knots_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] const std::vector<double>& knots() const { return knots_; }
    [[nodiscard]] double front() const { return knots_.front(); }
    [[nodiscard]] double back() const { return knots_.back(); }

    /// Length of interval i, for i = 1..N.
    [[nodiscard]] double delta(int i) const {
        return knots_[static_cast<std::size_t>(i)] - knots_[static_cast<std::size_t>(i) - 1];
    }

    [[nodiscard]] double max_delta() const {
        double d = 0.0;
        for (int i = 1; i <= intervals(); ++i) d = std::max(d, delta(i));
        return d;
    }

    [[nodiscard]] double min_delta() const {
        double d = delta(1);
        for (int i = 2; i <= intervals(); ++i) d = std::min(d, delta(i));
        return d;
    }

    /// Mesh ratio alpha = (min delta_i) / (max delta_i), in (0, 1].
    [[nodiscard]] double mesh_ratio() const { return min_delta() / max_delta(); }

    /// Interval index in 1..N containing t. Knot values resolve to the
    /// right-hand interval, except the last knot which stays in interval N.
    /// Throws OutOfDomain when t lies outside the grid by more than 1e-12.
    [[nodiscard]] int locate(double t) const {
        if (t < knots_.front() - 1e-12 || t > knots_.back() + 1e-12) {
            throw OutOfDomain("evaluation time outside the knot range");
        }
        const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
        const int idx = static_cast<int>(it - knots_.begin());
        return std::clamp(idx, 1, intervals());
    }

private:
    std::vector<double> knots_;
};

/// Vector-valued natural cubic spline. Piecewise representation on interval i:
///   y_i(t) = a_i (t - t_{i-1})^3 + b_i (t - t_{i-1})^2 + c_i (t - t_{i-1}) + d_i
/// with second-derivative knots m (m_1 = m_{N+1} = 0).
class CubicSpline {
public:
    CubicSpline(TimeGrid grid, Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c,
                Eigen::MatrixXd d, Eigen::MatrixXd m)
        : grid_(std::move(grid)),
          a_(std::move(a)),
          b_(std::move(b)),
          c_(std::move(c)),
          d_(std::move(d)),
          m_(std::move(m)) {}

    [[nodiscard]] const TimeGrid& grid() const { return grid_; }
    [[nodiscard]] Eigen::Index dim() const { return a_.rows(); }

    /// Second derivatives at the knots, one column per knot (zero at the ends).
    [[nodiscard]] const Eigen::MatrixXd& second_derivatives() const { return m_; }

    [[nodiscard]] Eigen::VectorXd value(double t) const {
        const int i = grid_.locate(t);
        const double s = t - grid_.knot(i - 1);
        return ((a_.col(i - 1) * s + b_.col(i - 1)) * s + c_.col(i - 1)) * s + d_.col(i - 1);
    }

    /// First or second derivative; the second derivative is piecewise linear.
    [[nodiscard]] Eigen::VectorXd derivative(double t, int order) const {
        if (order != 1 && order != 2) {
            throw OutOfRange("derivative order must be 1 or 2");
        }
        const int i = grid_.locate(t);
        const double s = t - grid_.knot(i - 1);
        if (order == 1) {
            return (3.0 * a_.col(i - 1) * s + 2.0 * b_.col(i - 1)) * s + c_.col(i - 1);
        }
        return 6.0 * a_.col(i - 1) * s + 2.0 * b_.col(i - 1);
    }

    /// Exact curvature energy: integral of |y''|^2 over the grid
    /// (y'' is piecewise linear, so each interval integrates in closed form).
    [[nodiscard]] double curvature_energy() const {
        double e = 0.0;
        for (int i = 1; i <= grid_.intervals(); ++i) {
            const auto& mi = m_.col(i - 1);
            const auto& mj = m_.col(i);
            e += grid_.delta(i) / 3.0 *
                 (mi.squaredNorm() + mi.dot(mj) + mj.squaredNorm());
        }
        return e;
    }

private:
    TimeGrid grid_;
    Eigen::MatrixXd a_, b_, c_, d_; // d x N coefficient blocks
    Eigen::MatrixXd m_;             // d x (N+1) second derivatives at knots
};

namespace detail {

inline Eigen::MatrixXd stack_points(const std::vector<Eigen::VectorXd>& points) {
    const Eigen::Index d = points.front().size();
    Eigen::MatrixXd x(d, static_cast<Eigen::Index>(points.size()));
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (points[k].size() != d) {
            throw DimensionMismatch("interpolation points have inconsistent dimensions");
        }
        x.col(static_cast<Eigen::Index>(k)) = points[k];
    }
    if (!x.allFinite()) {
        throw NonFinite("interpolation points must be finite");
    }
    return x;
}

} // namespace detail

/// Natural cubic spline through (t_i, x_i). Solves the symmetric tridiagonal
/// system T m = 6 Delta for the interior second derivatives by the Thomas
/// algorithm (T has diagonal 2(delta_i + delta_{i+1}) and off-diagonal
/// delta_{i+1}; no pivoting needed, T is strictly diagonally dominant).
inline CubicSpline fit_natural_cubic(const TimeGrid& grid, const Eigen::MatrixXd& x) {
    const int n = grid.intervals();
    if (x.cols() != n + 1) {
        throw LengthMismatch("need one point per knot");
    }
    if (!x.allFinite()) {
        throw NonFinite("interpolation points must be finite");
    }
    const Eigen::Index d = x.rows();

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, n + 1);
    if (n >= 2) {
        const int sz = n - 1;
        Eigen::VectorXd diag(sz), off(sz);
        Eigen::MatrixXd rhs(d, sz);
        for (int i = 1; i < n; ++i) {
            diag(i - 1) = 2.0 * (grid.delta(i) + grid.delta(i + 1));
            off(i - 1) = grid.delta(i + 1); // coupling to the next interior unknown
            rhs.col(i - 1) = 6.0 * ((x.col(i + 1) - x.col(i)) / grid.delta(i + 1) -
                                    (x.col(i) - x.col(i - 1)) / grid.delta(i));
        }
        // Thomas sweep with vector right-hand sides.
        for (int k = 1; k < sz; ++k) {
            const double w = grid.delta(k + 1) / diag(k - 1); // sub-diagonal entry
            diag(k) -= w * off(k - 1);
            rhs.col(k) -= w * rhs.col(k - 1);
        }
        m.col(n - 1) = rhs.col(sz - 1) / diag(sz - 1);
        for (int k = sz - 2; k >= 0; --k) {
            m.col(k + 1) = (rhs.col(k) - off(k) * m.col(k + 2)) / diag(k);
        }
    }

    Eigen::MatrixXd a(d, n), b(d, n), c(d, n), dd(d, n);
    for (int i = 1; i <= n; ++i) {
        const double h = grid.delta(i);
        a.col(i - 1) = (m.col(i) - m.col(i - 1)) / (6.0 * h);
        b.col(i - 1) = 0.5 * m.col(i - 1);
        c.col(i - 1) = (x.col(i) - x.col(i - 1)) / h - (m.col(i) + 2.0 * m.col(i - 1)) * h / 6.0;
        dd.col(i - 1) = x.col(i - 1);
    }
    return CubicSpline(grid, std::move(a), std::move(b), std::move(c), std::move(dd),
                       std::move(m));
}

inline CubicSpline fit_natural_cubic(const TimeGrid& grid,
                                     const std::vector<Eigen::VectorXd>& points) {
    if (static_cast<int>(points.size()) != grid.intervals() + 1) {
        throw LengthMismatch("need one point per knot");
    }
    return fit_natural_cubic(grid, detail::stack_points(points));
}

/// Piecewise-linear interpolant: on [t_{i-1}, t_i] the value is the convex
/// combination ((t_i - t)/delta_i) x_{i-1} + ((t - t_{i-1})/delta_i) x_i.
class PiecewiseLinearCurve {
public:
    PiecewiseLinearCurve(TimeGrid grid, Eigen::MatrixXd points)
        : grid_(std::move(grid)), x_(std::move(points)) {
        if (x_.cols() != grid_.intervals() + 1) {
            throw LengthMismatch("need one point per knot");
        }
        if (!x_.allFinite()) {
            throw NonFinite("interpolation points must be finite");
        }
    }

    [[nodiscard]] const TimeGrid& grid() const { return grid_; }
    [[nodiscard]] Eigen::Index dim() const { return x_.rows(); }

    [[nodiscard]] Eigen::VectorXd value(double t) const {
        const int i = grid_.locate(t);
        const double h = grid_.delta(i);
        const double wl = (grid_.knot(i) - t) / h;
        const double wr = (t - grid_.knot(i - 1)) / h;
        return wl * x_.col(i - 1) + wr * x_.col(i);
    }

private:
    TimeGrid grid_;
    Eigen::MatrixXd x_;
};

inline PiecewiseLinearCurve fit_piecewise_linear(const TimeGrid& grid, const Eigen::MatrixXd& x) {
    return PiecewiseLinearCurve(grid, x);
}

inline PiecewiseLinearCurve fit_piecewise_linear(const TimeGrid& grid,
                                                 const std::vector<Eigen::VectorXd>& points) {
    if (static_cast<int>(points.size()) != grid.intervals() + 1) {
        throw LengthMismatch("need one point per knot");
    }
    return PiecewiseLinearCurve(grid, detail::stack_points(points));
}

/// Dense tridiagonal matrix T of the natural-spline system for a grid.
inline Eigen::MatrixXd spline_system_matrix(const TimeGrid& grid) {
    const int n = grid.intervals();
    const int sz = n - 1;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(sz, sz);
    for (int i = 1; i < n; ++i) {
        t(i - 1, i - 1) = 2.0 * (grid.delta(i) + grid.delta(i + 1));
        if (i < n - 1) {
            t(i - 1, i) = grid.delta(i + 1);
            t(i, i - 1) = grid.delta(i + 1);
        }
    }
    return t;
}

/// Checks the entrywise bound |T^{-1}_{ij}| <= 1 / (4 alpha^2 (1+alpha)^{|i-j|-1} delta)
/// by dense inversion. Test oracle only; the fitting path never inverts T densely.
inline bool tridiag_inverse_bound_check(const TimeGrid& grid) {
    const int n = grid.intervals();
    if (n < 2) {
        throw LengthMismatch("bound check needs at least one interior knot");
    }
    const Eigen::MatrixXd t = spline_system_matrix(grid);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(t);
    if (!lu.isInvertible()) {
        throw SingularMatrix("spline system matrix is singular");
    }
    const Eigen::MatrixXd inv = lu.inverse();
    const double alpha = grid.mesh_ratio();
    const double delta = grid.max_delta();
    for (int i = 0; i < inv.rows(); ++i) {
        for (int j = 0; j < inv.cols(); ++j) {
            const double bound =
                1.0 / (4.0 * alpha * alpha * std::pow(1.0 + alpha, std::abs(i - j) - 1) * delta);
            if (std::abs(inv(i, j)) > bound) {
                return false;
            }
        }
    }
    return true;
}

} // namespace tsplines
