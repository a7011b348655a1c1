#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tsplines/bures.hpp"
#include "tsplines/errors.hpp"
#include "tsplines/normal.hpp"
#include "tsplines/spline1d.hpp"
#include "tsplines/transport_spline.hpp"

namespace tsplines {

/// 1D Gaussian Wasserstein distance: sqrt((m_a - m_b)^2 + (s_a - s_b)^2).
inline double w2_error_1d_gaussian(const Gaussian1D& a, const Gaussian1D& b) {
    return std::hypot(a.mean - b.mean, a.sigma - b.sigma);
}

/// Analytic curve of centered Gaussians with diagonal covariance
/// diag(sigma_1(t)^2, ..., sigma_d(t)^2). Carries closed-form first and
/// second derivatives of each sigma_j; the curve constants L, R and the
/// covariance floor lambda_min are obtained by dense probing.
class SyntheticGaussianCurve {
public:
    struct Coordinate {
        std::function<double(double)> sigma;
        std::function<double(double)> dsigma;
        std::function<double(double)> d2sigma;
    };

    enum class ScalarKind { Sinusoid, Counterexample };

    explicit SyntheticGaussianCurve(std::vector<Coordinate> coords)
        : coords_(std::move(coords)) {
        probe_constants();
    }

    static SyntheticGaussianCurve scalar_variance(ScalarKind kind) {
        using std::numbers::pi;
        Coordinate c;
        if (kind == ScalarKind::Sinusoid) {
            c.sigma = [](double t) { return 2.0 + 0.5 * std::sin(2.0 * pi * t); };
            c.dsigma = [](double t) { return pi * std::cos(2.0 * pi * t); };
            c.d2sigma = [](double t) { return -2.0 * pi * pi * std::sin(2.0 * pi * t); };
        } else {
            // sigma_t = sqrt((1-t)^2 + t^2); the marginals of straight lines
            // between independent standard Gaussians.
            auto q = [](double t) { return (1.0 - t) * (1.0 - t) + t * t; };
            c.sigma = [q](double t) { return std::sqrt(q(t)); };
            c.dsigma = [q](double t) { return (2.0 * t - 1.0) / std::sqrt(q(t)); };
            c.d2sigma = [q](double t) { return 1.0 / std::pow(q(t), 1.5); };
        }
        return SyntheticGaussianCurve({std::move(c)});
    }

    /// Two-coordinate commuting-diagonal family for d = 2 rate experiments.
    static SyntheticGaussianCurve diagonal2d() {
        using std::numbers::pi;
        Coordinate a;
        a.sigma = [](double t) { return 2.0 + 0.5 * std::sin(2.0 * pi * t); };
        a.dsigma = [](double t) { return pi * std::cos(2.0 * pi * t); };
        a.d2sigma = [](double t) { return -2.0 * pi * pi * std::sin(2.0 * pi * t); };
        Coordinate b;
        b.sigma = [](double t) { return 1.5 + 0.4 * std::cos(pi * t); };
        b.dsigma = [](double t) { return -0.4 * pi * std::sin(pi * t); };
        b.d2sigma = [](double t) { return -0.4 * pi * pi * std::cos(pi * t); };
        return SyntheticGaussianCurve({std::move(a), std::move(b)});
    }

    [[nodiscard]] int dim() const { return static_cast<int>(coords_.size()); }

    [[nodiscard]] double sigma(int j, double t) const { return coords_[j].sigma(t); }

    [[nodiscard]] GaussianMeasure measure_at(double t) const {
        const int d = dim();
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
        for (int j = 0; j < d; ++j) {
            const double s = coords_[j].sigma(t);
            cov(j, j) = s * s;
        }
        return GaussianMeasure::centered(std::move(cov));
    }

    [[nodiscard]] Gaussian1D scalar_at(double t) const {
        return Gaussian1D{0.0, coords_.front().sigma(t)};
    }

    /// sup_t |dX*_t/dt| over the probe grid.
    [[nodiscard]] double lipschitz() const { return lipschitz_; }
    /// sup_t |d^2X*_t/dt^2| over the probe grid.
    [[nodiscard]] double curvature_bound() const { return curvature_; }
    /// min over the probe grid of the smallest covariance eigenvalue.
    [[nodiscard]] double lambda_min() const { return lambda_min_; }

private:
    void probe_constants() {
        constexpr int probes = 10000;
        double l2 = 0.0, r2 = 0.0, lmin = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= probes; ++k) {
            const double t = static_cast<double>(k) / probes;
            double dv = 0.0, ddv = 0.0;
            for (const auto& c : coords_) {
                const double s = c.sigma(t);
                const double ds = c.dsigma(t);
                const double dds = c.d2sigma(t);
                if (!(s > 0.0) || !std::isfinite(ds) || !std::isfinite(dds)) {
                    throw NotPsd("curve must stay positive definite with finite derivatives");
                }
                dv += ds * ds;
                ddv += dds * dds;
                lmin = std::min(lmin, s * s);
            }
            l2 = std::max(l2, dv);
            r2 = std::max(r2, ddv);
        }
        lipschitz_ = std::sqrt(l2);
        curvature_ = std::sqrt(r2);
        lambda_min_ = lmin;
    }

    std::vector<Coordinate> coords_;
    double lipschitz_ = 0.0, curvature_ = 0.0, lambda_min_ = 0.0;
};

inline SyntheticGaussianCurve make_scalar_variance_curve(SyntheticGaussianCurve::ScalarKind kind) {
    return SyntheticGaussianCurve::scalar_variance(kind);
}

/// Result of one convergence-rate experiment.
struct RateReport {
    struct Entry {
        double delta;     // realized max interval length
        double alpha;     // realized mesh ratio
        double sup_error; // sup_t W2(mu_t, mu*_t) over the probe grid
        double bound;     // (58/alpha^3) R delta^2, or 2.5 R delta^2 for the linear kind
        double ratio;     // sup_error / bound
    };

    std::vector<Entry> entries;
    double slope = 0.0; // least-squares slope of log(sup_error) vs log(delta)
    InterpKind kind = InterpKind::Cubic;
    double lipschitz = 0.0;
    double curvature = 0.0;
    double lambda_min = 0.0;
};

namespace detail {

/// Knot grid with n intervals and mesh ratio alpha_target: interval lengths
/// alternate between a and alpha_target * a.
inline TimeGrid rate_grid(int n, double alpha_target) {
    std::vector<double> knots;
    knots.reserve(n + 1);
    knots.push_back(0.0);
    if (alpha_target >= 1.0) {
        for (int i = 1; i < n; ++i) knots.push_back(static_cast<double>(i) / n);
    } else {
        const int long_count = (n + 1) / 2;
        const int short_count = n - long_count;
        const double a = 1.0 / (long_count + alpha_target * short_count);
        double t = 0.0;
        for (int i = 1; i < n; ++i) {
            t += (i % 2 == 1) ? a : alpha_target * a;
            knots.push_back(t);
        }
    }
    knots.push_back(1.0);
    return TimeGrid(std::move(knots));
}

} // namespace detail

/// Runs the approximation-guarantee experiment: for each mesh, samples the
/// curve at the knots, fits the transport spline, and measures
/// sup_t W2(mu_t, mu*_t) on a dense probe grid. The mesh must satisfy the
/// smallness condition delta < sqrt(lambda_min) / (2 L).
inline RateReport run_rate_experiment(const SyntheticGaussianCurve& curve, InterpKind kind,
                                      const std::vector<double>& mesh_list,
                                      double alpha_target = 1.0, int probe_points = 1000) {
    if (mesh_list.empty()) {
        throw LengthMismatch("mesh list must not be empty");
    }
    RateReport report;
    report.kind = kind;
    report.lipschitz = curve.lipschitz();
    report.curvature = curve.curvature_bound();
    report.lambda_min = curve.lambda_min();

    const double delta_limit = std::sqrt(curve.lambda_min()) / (2.0 * curve.lipschitz());

    for (double target : mesh_list) {
        const int n = std::max(1, static_cast<int>(std::lround(1.0 / target)));
        const TimeGrid grid = detail::rate_grid(n, alpha_target);
        const double delta = grid.max_delta();
        const double alpha = grid.mesh_ratio();
        if (!(delta < delta_limit)) {
            throw MeshTooCoarse("mesh violates delta < sqrt(lambda_min)/(2L)");
        }

        std::vector<GaussianMeasure> obs;
        obs.reserve(grid.size());
        for (double t : grid.knots()) obs.push_back(curve.measure_at(t));
        const TransportSpline ts = TransportSpline::fit(grid, obs, kind);

        double sup = 0.0;
        for (int k = 0; k <= probe_points; ++k) {
            const double t = static_cast<double>(k) / probe_points;
            const GaussianMeasure law = ts.gaussian_law(t);
            double err;
            if (curve.dim() == 1) {
                const Gaussian1D fitted{law.mean()(0), std::sqrt(law.cov_matrix()(0, 0))};
                err = w2_error_1d_gaussian(fitted, curve.scalar_at(t));
            } else {
                err = bures_wasserstein_distance(law, curve.measure_at(t));
            }
            sup = std::max(sup, err);
        }

        RateReport::Entry e;
        e.delta = delta;
        e.alpha = alpha;
        e.sup_error = sup;
        e.bound = kind == InterpKind::Cubic
                      ? 58.0 / (alpha * alpha * alpha) * curve.curvature_bound() * delta * delta
                      : 2.5 * curve.curvature_bound() * delta * delta;
        e.ratio = e.sup_error / e.bound;
        report.entries.push_back(e);
    }

    // Least-squares slope of log error vs log delta.
    const auto m = static_cast<double>(report.entries.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& e : report.entries) {
        const double x = std::log(e.delta);
        const double y = std::log(e.sup_error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    report.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return report;
}

/// Coupled trajectory bundle for the independent-coupling counterexample data
/// mu*_{t_i} = N(0, (1-t_i)^2 + t_i^2).
class TrajectorySet {
public:
    enum class Coupling { Independent, Transport };

    TrajectorySet(TimeGrid grid, Eigen::MatrixXd knot_values, InterpKind kind)
        : weights_(std::move(grid), kind), knot_values_(std::move(knot_values)) {}

    [[nodiscard]] Eigen::Index samples() const { return knot_values_.rows(); }
    [[nodiscard]] const TimeGrid& grid() const { return weights_.grid(); }
    [[nodiscard]] const Eigen::MatrixXd& knot_values() const { return knot_values_; }

    [[nodiscard]] double value(Eigen::Index sample, double t) const {
        return knot_values_.row(sample).dot(weights_.at(t));
    }

    /// Values of every trajectory at one time.
    [[nodiscard]] Eigen::VectorXd values_at(double t) const {
        return knot_values_ * weights_.at(t);
    }

private:
    SplineWeights weights_;
    Eigen::MatrixXd knot_values_;
};

/// Trajectories through the counterexample marginals. The independent kind
/// draws (X0, X1) i.i.d. standard normal and follows the straight line
/// (1-t) X0 + t X1 (the jointly Gaussian zero-cost coupling); the transport
/// kind samples deterministic transport-spline trajectories through the same
/// marginals.
inline TrajectorySet generate_counterexample_trajectories(int n_samples,
                                                          TrajectorySet::Coupling coupling,
                                                          std::mt19937_64& rng,
                                                          int knot_count = 5) {
    if (n_samples < 1) {
        throw LengthMismatch("need at least one sample");
    }
    if (knot_count < 2) {
        throw LengthMismatch("need at least two knots");
    }
    std::vector<double> knots(knot_count);
    for (int i = 0; i < knot_count; ++i) {
        knots[i] = static_cast<double>(i) / (knot_count - 1);
    }
    TimeGrid grid(knots);

    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd z(n_samples, knot_count);

    if (coupling == TrajectorySet::Coupling::Independent) {
        // Straight lines through independent endpoints; piecewise-linear
        // interpolation of collinear knot values reproduces the line exactly.
        for (int s = 0; s < n_samples; ++s) {
            const double x0 = normal(rng);
            const double x1 = normal(rng);
            for (int i = 0; i < knot_count; ++i) {
                z(s, i) = (1.0 - knots[i]) * x0 + knots[i] * x1;
            }
        }
        return TrajectorySet(std::move(grid), std::move(z), InterpKind::PiecewiseLinear);
    }

    const auto curve =
        SyntheticGaussianCurve::scalar_variance(SyntheticGaussianCurve::ScalarKind::Counterexample);
    for (int s = 0; s < n_samples; ++s) {
        const double x0 = normal(rng);
        for (int i = 0; i < knot_count; ++i) {
            // 1D chain of scalar Monge maps composes to sigma(t_i) / sigma(0).
            z(s, i) = x0 * curve.sigma(0, knots[i]) / curve.sigma(0, 0.0);
        }
    }
    return TrajectorySet(std::move(grid), std::move(z), InterpKind::Cubic);
}

} // namespace tsplines
