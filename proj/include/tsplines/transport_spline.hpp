#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tsplines/bures.hpp"
#include "tsplines/coupling.hpp"
#include "tsplines/errors.hpp"
#include "tsplines/spline1d.hpp"

namespace tsplines {

enum class InterpKind { Cubic, PiecewiseLinear };

/// Row of interpolation weights w_i(t): the value of the interpolant through
/// data (x_0, ..., x_N) at time t is sum_i w_i(t) x_i. For the cubic kind the
/// rows come from N+1 scalar splines fitted once to unit-coordinate data
/// (O(N^2) precompute); for the linear kind they are the hat functions.
class SplineWeights {
public:
    SplineWeights(TimeGrid grid, InterpKind kind) : grid_(std::move(grid)), kind_(kind) {
        if (kind_ == InterpKind::Cubic) {
            const int n = grid_.intervals();
            basis_.reserve(n + 1);
            for (int j = 0; j <= n; ++j) {
                Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(1, n + 1);
                unit(0, j) = 1.0;
                basis_.push_back(fit_natural_cubic(grid_, unit));
            }
        }
    }

    [[nodiscard]] const TimeGrid& grid() const { return grid_; }
    [[nodiscard]] InterpKind kind() const { return kind_; }

    [[nodiscard]] Eigen::VectorXd at(double t) const {
        const int n = grid_.intervals();
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n + 1);
        if (kind_ == InterpKind::Cubic) {
            for (int j = 0; j <= n; ++j) w(j) = basis_[j].value(t)(0);
        } else {
            const int i = grid_.locate(t);
            const double h = grid_.delta(i);
            w(i - 1) = (grid_.knot(i) - t) / h;
            w(i) = (t - grid_.knot(i - 1)) / h;
        }
        return w;
    }

private:
    TimeGrid grid_;
    InterpKind kind_;
    std::vector<CubicSpline> basis_;
};

/// Measure-valued spline produced by coupling observations with Monge maps
/// and interpolating each trajectory in Euclidean space. Gaussian families
/// propagate the law in closed form; 1D families carry the spline of
/// quantile functions; cloud families interpolate matched points.
class TransportSpline {
public:
    enum class Family { Gaussian, Measure1D, Cloud };

    static TransportSpline fit(const TimeGrid& grid,
                               const std::vector<GaussianMeasure>& observations,
                               InterpKind kind = InterpKind::Cubic) {
        check_count(grid, observations.size());
        GaussianPayload payload;
        payload.observations = observations;
        payload.chain = sequential_gaussian_coupling(observations);

        const Eigen::Index d = observations.front().dim();
        payload.composed.reserve(observations.size());
        payload.composed.push_back(LinearMap::identity(d));
        for (const auto& step : payload.chain) {
            payload.composed.push_back(step.compose(payload.composed.back()));
        }

        Eigen::MatrixXd means(d, static_cast<Eigen::Index>(observations.size()));
        for (std::size_t i = 0; i < observations.size(); ++i) {
            means.col(static_cast<Eigen::Index>(i)) = observations[i].mean();
        }
        payload.mean_spline =
            kind == InterpKind::Cubic
                ? MeanCurve(fit_natural_cubic(grid, means))
                : MeanCurve(fit_piecewise_linear(grid, means));

        return TransportSpline(grid, kind, std::move(payload));
    }

    static TransportSpline fit(const TimeGrid& grid, const std::vector<Measure1D>& observations,
                               InterpKind kind = InterpKind::Cubic) {
        check_count(grid, observations.size());
        Measure1DPayload payload;
        payload.observations = observations;
        TransportSpline ts(grid, kind, std::move(payload));
        ts.probe_quantile_monotonicity();
        return ts;
    }

    static TransportSpline fit(const TimeGrid& grid, const std::vector<PointCloud>& observations,
                               InterpKind kind = InterpKind::Cubic) {
        check_count(grid, observations.size());
        const Eigen::Index n = observations.front().size();
        const Eigen::Index d = observations.front().dim();
        for (const auto& c : observations) {
            if (c.size() != n) throw SizeMismatch("all clouds must have the same size");
            if (c.dim() != d) throw DimensionMismatch("all clouds must share one dimension");
        }

        CloudPayload payload;
        payload.observations = observations;
        // Matched positions: point k's trajectory follows the composed matchings.
        std::vector<int> index(n);
        for (Eigen::Index k = 0; k < n; ++k) index[k] = static_cast<int>(k);
        payload.paths.assign(n, Eigen::MatrixXd(d, static_cast<Eigen::Index>(observations.size())));
        for (Eigen::Index k = 0; k < n; ++k) payload.paths[k].col(0) = observations[0].point(k);
        for (std::size_t i = 1; i < observations.size(); ++i) {
            const auto sigma = assignment_coupling(observations[i - 1], observations[i]);
            for (Eigen::Index k = 0; k < n; ++k) {
                index[k] = sigma[index[k]];
                payload.paths[k].col(static_cast<Eigen::Index>(i)) =
                    observations[i].point(index[k]);
            }
        }
        return TransportSpline(grid, kind, std::move(payload));
    }

    static TransportSpline fit_piecewise_geodesic(const TimeGrid& grid,
                                                  const std::vector<GaussianMeasure>& obs) {
        return fit(grid, obs, InterpKind::PiecewiseLinear);
    }
    static TransportSpline fit_piecewise_geodesic(const TimeGrid& grid,
                                                  const std::vector<Measure1D>& obs) {
        return fit(grid, obs, InterpKind::PiecewiseLinear);
    }
    static TransportSpline fit_piecewise_geodesic(const TimeGrid& grid,
                                                  const std::vector<PointCloud>& obs) {
        return fit(grid, obs, InterpKind::PiecewiseLinear);
    }

    [[nodiscard]] Family family() const {
        if (std::holds_alternative<GaussianPayload>(payload_)) return Family::Gaussian;
        if (std::holds_alternative<Measure1DPayload>(payload_)) return Family::Measure1D;
        return Family::Cloud;
    }

    [[nodiscard]] InterpKind kind() const { return kind_; }
    [[nodiscard]] const TimeGrid& grid() const { return grid_; }
    [[nodiscard]] const SplineWeights& weights() const { return weights_; }

    [[nodiscard]] Eigen::Index dim() const {
        if (const auto* g = std::get_if<GaussianPayload>(&payload_)) {
            return g->observations.front().dim();
        }
        if (const auto* c = std::get_if<CloudPayload>(&payload_)) {
            return c->observations.front().dim();
        }
        return 1;
    }

    /// Deterministic trajectory through the chain images of x0, interpolated
    /// by a per-trajectory Euclidean fit and evaluated at the given times.
    [[nodiscard]] std::vector<Eigen::VectorXd> sample_trajectory(
        const Eigen::VectorXd& x0, const std::vector<double>& times) const {
        const Eigen::MatrixXd knot_images = trajectory_knots(x0);
        std::vector<Eigen::VectorXd> out;
        out.reserve(times.size());
        if (kind_ == InterpKind::Cubic) {
            const CubicSpline traj = fit_natural_cubic(grid_, knot_images);
            for (double t : times) out.push_back(traj.value(t));
        } else {
            const PiecewiseLinearCurve traj = fit_piecewise_linear(grid_, knot_images);
            for (double t : times) out.push_back(traj.value(t));
        }
        return out;
    }

    /// Images of x0 at the knots under the coupling chain.
    [[nodiscard]] Eigen::MatrixXd trajectory_knots(const Eigen::VectorXd& x0) const {
        const int count = grid_.intervals() + 1;
        if (const auto* g = std::get_if<GaussianPayload>(&payload_)) {
            Eigen::MatrixXd z(g->observations.front().dim(), count);
            for (int i = 0; i < count; ++i) z.col(i) = g->composed[i](x0);
            return z;
        }
        if (const auto* m = std::get_if<Measure1DPayload>(&payload_)) {
            if (x0.size() != 1) throw DimensionMismatch("1D family expects scalar start points");
            const double u = m->observations.front().cdf(x0(0));
            Eigen::MatrixXd z(1, count);
            for (int i = 0; i < count; ++i) z(0, i) = m->observations[i].quantile(u);
            return z;
        }
        const auto& c = std::get<CloudPayload>(payload_);
        // Start points are cloud members; route through the nearest source point.
        Eigen::Index best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < c.observations.front().size(); ++k) {
            const double dist = (c.observations.front().point(k) - x0).squaredNorm();
            if (dist < best_dist) {
                best_dist = dist;
                best = k;
            }
        }
        return c.paths[best];
    }

    /// Closed-form law of the Gaussian transport spline at time t:
    /// N(mean_spline(t), B Sigma_0 B^T) with B = sum_i w_i(t) C_i, where C_i
    /// is the composed chain matrix from knot 0 to knot i.
    [[nodiscard]] GaussianMeasure gaussian_law(double t) const {
        const auto* g = std::get_if<GaussianPayload>(&payload_);
        if (g == nullptr) {
            throw WrongFamily("law propagation requires the Gaussian family");
        }
        const Eigen::VectorXd w = weights_.at(t);
        const Eigen::Index d = g->observations.front().dim();
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
        for (int i = 0; i < w.size(); ++i) b += w(i) * g->composed[i].matrix();
        Eigen::MatrixXd cov = detail::symmetrize(
            b * g->observations.front().cov_matrix() * b.transpose());
        return GaussianMeasure(mean_value(*g, t), SymPsdMatrix(std::move(cov)));
    }

    /// Mean path of the Gaussian family (the Euclidean spline through the knot means).
    [[nodiscard]] Eigen::VectorXd mean_at(double t) const {
        const auto* g = std::get_if<GaussianPayload>(&payload_);
        if (g == nullptr) {
            throw WrongFamily("mean path requires the Gaussian family");
        }
        return mean_value(*g, t);
    }

    /// Quantile G_t(u) of the 1D-family law: the spline of quantile functions.
    [[nodiscard]] double quantile_at(double t, double u) const {
        const auto* m = std::get_if<Measure1DPayload>(&payload_);
        if (m == nullptr) {
            throw WrongFamily("quantile splines require the 1D family");
        }
        const Eigen::VectorXd w = weights_.at(t);
        double q = 0.0;
        for (int i = 0; i < w.size(); ++i) q += w(i) * m->observations[i].quantile(u);
        return q;
    }

    /// Quantile values of the 1D-family law at the given levels.
    [[nodiscard]] Eigen::VectorXd quantile_curve(double t, const std::vector<double>& levels) const {
        const auto* m = std::get_if<Measure1DPayload>(&payload_);
        if (m == nullptr) {
            throw WrongFamily("quantile splines require the 1D family");
        }
        const Eigen::VectorXd w = weights_.at(t);
        Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(levels.size()));
        for (int i = 0; i < w.size(); ++i) {
            q += w(i) * m->observations[i].quantiles_at(levels);
        }
        return q;
    }

    /// Whether G_t stayed a valid (monotone) quantile function at every probed
    /// time. The hypothesis is checkable, not guaranteed; no repair is applied.
    [[nodiscard]] bool quantile_spline_valid() const {
        const auto* m = std::get_if<Measure1DPayload>(&payload_);
        if (m == nullptr) {
            throw WrongFamily("quantile validity applies to the 1D family");
        }
        return m->quantiles_monotone;
    }

    /// Matched point positions of the cloud family at time t, one row per point.
    [[nodiscard]] Eigen::MatrixXd cloud_positions(double t) const {
        const auto* c = std::get_if<CloudPayload>(&payload_);
        if (c == nullptr) {
            throw WrongFamily("matched positions require the cloud family");
        }
        const Eigen::VectorXd w = weights_.at(t);
        Eigen::MatrixXd out(c->observations.front().size(), c->observations.front().dim());
        for (Eigen::Index k = 0; k < out.rows(); ++k) {
            out.row(k) = (c->paths[k] * w).transpose();
        }
        return out;
    }

    /// Path of one cloud point across the knots (d x (N+1)).
    [[nodiscard]] const Eigen::MatrixXd& cloud_path(Eigen::Index k) const {
        const auto& c = std::get<CloudPayload>(payload_);
        return c.paths[k];
    }

    [[nodiscard]] const GaussianCouplingChain& gaussian_chain() const {
        const auto* g = std::get_if<GaussianPayload>(&payload_);
        if (g == nullptr) {
            throw WrongFamily("chain access requires the Gaussian family");
        }
        return g->chain;
    }

    [[nodiscard]] const std::vector<GaussianMeasure>& gaussian_observations() const {
        const auto* g = std::get_if<GaussianPayload>(&payload_);
        if (g == nullptr) {
            throw WrongFamily("observation access requires the Gaussian family");
        }
        return g->observations;
    }

    [[nodiscard]] const std::vector<Measure1D>& measure1d_observations() const {
        const auto* m = std::get_if<Measure1DPayload>(&payload_);
        if (m == nullptr) {
            throw WrongFamily("observation access requires the 1D family");
        }
        return m->observations;
    }

private:
    using MeanCurve = std::variant<CubicSpline, PiecewiseLinearCurve>;

    struct GaussianPayload {
        std::vector<GaussianMeasure> observations;
        GaussianCouplingChain chain;
        std::vector<LinearMap> composed; // C_0 = id, C_i = T_i ... T_1
        std::optional<MeanCurve> mean_spline;
    };

    struct Measure1DPayload {
        std::vector<Measure1D> observations;
        bool quantiles_monotone = true;
    };

    struct CloudPayload {
        std::vector<PointCloud> observations;
        std::vector<Eigen::MatrixXd> paths; // per point: d x (N+1) knot images
    };

    using Payload = std::variant<GaussianPayload, Measure1DPayload, CloudPayload>;

    TransportSpline(const TimeGrid& grid, InterpKind kind, Payload payload)
        : grid_(grid), kind_(kind), weights_(grid, kind), payload_(std::move(payload)) {}

    static void check_count(const TimeGrid& grid, std::size_t count) {
        if (static_cast<int>(count) != grid.intervals() + 1) {
            throw LengthMismatch("need one observation per knot");
        }
    }

    static Eigen::VectorXd mean_value(const GaussianPayload& g, double t) {
        return std::visit([&](const auto& curve) { return curve.value(t); }, *g.mean_spline);
    }

    /// Probe G_t for monotonicity on a time grid crossed with the module levels.
    void probe_quantile_monotonicity() {
        auto& m = std::get<Measure1DPayload>(payload_);
        const auto& levels = Measure1D::default_levels();
        Eigen::MatrixXd q(static_cast<Eigen::Index>(levels.size()),
                          static_cast<Eigen::Index>(m.observations.size()));
        for (std::size_t i = 0; i < m.observations.size(); ++i) {
            q.col(static_cast<Eigen::Index>(i)) = m.observations[i].quantiles_at(levels);
        }
        const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
        constexpr int probe_times = 201;
        const double t0 = grid_.front();
        const double t1 = grid_.back();
        for (int k = 0; k < probe_times; ++k) {
            const double t = t0 + (t1 - t0) * k / (probe_times - 1);
            const Eigen::VectorXd g_t = q * weights_.at(t);
            for (Eigen::Index j = 0; j + 1 < g_t.size(); ++j) {
                if (g_t(j + 1) - g_t(j) < -1e-9 * scale) {
                    m.quantiles_monotone = false;
                    return;
                }
            }
        }
    }

    TimeGrid grid_;
    InterpKind kind_;
    SplineWeights weights_;
    Payload payload_;
};

} // namespace tsplines
