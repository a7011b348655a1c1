// Acceptance suite: one checkable criterion per case, one pass/fail line each.
//
//   ./acceptance        runs every criterion and exits nonzero on any failure
//   ./acceptance <k>    runs criterion k only
//
// Tolerances are pinned in code next to each check.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "tsplines/tsplines.hpp"

namespace ts = tsplines;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why) {
        if (!ok && pass) {
            pass = false;
            detail = why;
        }
    }
};

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1. Convergence rate: sinusoid curve, uniform meshes, cubic kind.
//    Slope of log sup-error vs log delta in [1.8, 2.3]; error <= (58/a^3) R d^2.
Outcome criterion_1() {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    const auto curve =
        ts::make_scalar_variance_curve(ts::SyntheticGaussianCurve::ScalarKind::Sinusoid);
    const ts::RateReport report = ts::run_rate_experiment(
        curve, ts::InterpKind::Cubic, {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64});
    for (const auto& e : report.entries) {
        out.require(e.sup_error <= e.bound,
                    "error " + std::to_string(e.sup_error) + " exceeds bound at delta " +
                        std::to_string(e.delta));
    }
    out.require(report.slope >= 1.8 && report.slope <= 2.3,
                "slope " + std::to_string(report.slope) +
                    " outside [1.8, 2.3] (natural-spline superconvergence: the sinusoid's "
                    "second derivative vanishes at both endpoints, so the observed order "
                    "is four, not two; the stated bound itself holds at every mesh)");
    out.require(seconds_since(start) < 10.0, "runtime exceeded 10 s");
    return out;
}

// 2. Piecewise-geodesic bound: same meshes, linear kind, error <= 2.5 R d^2.
Outcome criterion_2() {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    const auto curve =
        ts::make_scalar_variance_curve(ts::SyntheticGaussianCurve::ScalarKind::Sinusoid);
    const ts::RateReport report = ts::run_rate_experiment(
        curve, ts::InterpKind::PiecewiseLinear, {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64});
    for (const auto& e : report.entries) {
        const double bound = 2.5 * report.curvature * e.delta * e.delta;
        out.require(e.sup_error <= bound, "error exceeds 2.5 R delta^2 at delta " +
                                              std::to_string(e.delta));
    }
    out.require(seconds_since(start) < 5.0, "runtime exceeded 5 s");
    return out;
}

// 3. Gaussian Monge pushforward: 500 random non-degenerate pairs, d <= 6,
//    relative Frobenius error of A S1 A^T vs S2 at most 1e-8.
Outcome criterion_3() {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal(0.0, 1.5);
    for (int trial = 0; trial < 500; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 6);
        Eigen::VectorXd mean_a(d), mean_b(d);
        for (int i = 0; i < d; ++i) {
            mean_a(i) = normal(rng);
            mean_b(i) = normal(rng);
        }
        const ts::GaussianMeasure a(mean_a, oracles::random_spd(d, rng));
        const ts::GaussianMeasure b(mean_b, oracles::random_spd(d, rng));
        const ts::LinearMap t = ts::gaussian_monge_map(a, b);
        const Eigen::MatrixXd pushed = t.matrix() * a.cov_matrix() * t.matrix().transpose();
        const double rel = (pushed - b.cov_matrix()).norm() / b.cov_matrix().norm();
        out.require(rel <= 1e-8, "pushforward error " + std::to_string(rel) + " at trial " +
                                     std::to_string(trial));
    }
    out.require(seconds_since(start) < 5.0, "runtime exceeded 5 s");
    return out;
}

// 4. Spline oracle equivalence: Thomas solve vs dense solve at 1e-9 on 200
//    random instances; the entrywise inverse bound holds for alpha >= 0.2.
Outcome criterion_4() {
    Outcome out;
    std::mt19937_64 rng(2025);
    std::normal_distribution<double> normal(0.0, 2.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 29);
        const int d = 1 + static_cast<int>(rng() % 4);
        const std::vector<double> knots = oracles::random_grid(n, rng, 0.2);
        Eigen::MatrixXd x(d, n + 1);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j <= n; ++j) x(i, j) = normal(rng);
        }
        const ts::TimeGrid grid(knots);
        const ts::CubicSpline spline = ts::fit_natural_cubic(grid, x);
        const oracles::DenseNaturalSpline oracle(knots, x);
        for (int k = 0; k < 50; ++k) {
            const double t = unif(rng);
            const double err = (spline.value(t) - oracle.value(t)).norm();
            out.require(err <= 1e-9, "spline/oracle gap " + std::to_string(err));
        }
        out.require(ts::tridiag_inverse_bound_check(grid),
                    "tridiagonal inverse bound failed at trial " + std::to_string(trial));
    }
    return out;
}

// 5. Assignment oracle equivalence: exact solver cost equals the n!
//    enumeration cost exactly on 300 random cloud pairs with n <= 7.
Outcome criterion_5() {
    Outcome out;
    std::mt19937_64 rng(2026);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 7);
        const int d = 1 + static_cast<int>(rng() % 3);
        Eigen::MatrixXd src(n, d), dst(n, d);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) {
                src(i, j) = normal(rng);
                dst(i, j) = normal(rng);
            }
        }
        const ts::PointCloud a(src), b(dst);
        const auto perm = ts::assignment_coupling(a, b);
        const double solver_cost = ts::assignment_cost(a, b, perm);
        const double brute_cost = oracles::brute_force_assignment_cost(src, dst);
        out.require(solver_cost == brute_cost,
                    "cost mismatch at trial " + std::to_string(trial));
    }
    return out;
}

// 6. 1D simultaneous coupling composition: T_{b,c} o T_{a,b} = T_{a,c}
//    within 1e-8 on 100 random Gaussian/uniform triples.
Outcome criterion_6() {
    Outcome out;
    std::mt19937_64 rng(2027);
    std::uniform_real_distribution<double> center(-2.0, 2.0);
    std::uniform_real_distribution<double> width(0.3, 2.0);
    auto random_measure = [&] {
        if (rng() % 2 == 0) return ts::Measure1D::gaussian(center(rng), width(rng));
        const double a = center(rng);
        return ts::Measure1D::uniform(a, a + width(rng));
    };
    const auto& levels = ts::Measure1D::default_levels();
    for (int trial = 0; trial < 100; ++trial) {
        const ts::Measure1D a = random_measure(), b = random_measure(), c = random_measure();
        const auto ab = ts::quantile_monge_map_1d(a, b);
        const auto bc = ts::quantile_monge_map_1d(b, c);
        const auto ac = ts::quantile_monge_map_1d(a, c);
        for (std::size_t k = 0; k < levels.size(); k += 4) {
            const double z = a.quantile(levels[k]);
            const double gap = std::abs(bc(ab(z)) - ac(z));
            out.require(gap <= 1e-8, "composition gap " + std::to_string(gap));
        }
    }
    return out;
}

// 7. 1D law consistency: on datasets whose quantile spline stays monotone,
//    transport-spline quantiles match the dense spline of quantile functions
//    within 1e-8 at 20 random times.
Outcome criterion_7() {
    Outcome out;
    std::mt19937_64 rng(2028);
    std::uniform_real_distribution<double> mean_d(-1.0, 1.0);
    std::uniform_real_distribution<double> sd_d(0.6, 1.8);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_real_distribution<double> level(0.02, 0.98);

    int accepted = 0, attempts = 0;
    while (accepted < 50 && attempts < 500) {
        ++attempts;
        const int n = 2 + static_cast<int>(rng() % 5);
        const std::vector<double> knots = oracles::random_grid(n, rng, 0.3);
        std::vector<ts::Measure1D> obs;
        for (int i = 0; i <= n; ++i) obs.push_back(ts::Measure1D::gaussian(mean_d(rng), sd_d(rng)));
        const ts::TimeGrid grid(knots);
        const ts::TransportSpline spline = ts::TransportSpline::fit(grid, obs);
        if (!spline.quantile_spline_valid()) continue;
        ++accepted;

        for (int k = 0; k < 20; ++k) {
            const double t = unif(rng);
            const double u = level(rng);
            Eigen::MatrixXd q(1, n + 1);
            for (int i = 0; i <= n; ++i) q(0, i) = obs[i].quantile(u);
            const oracles::DenseNaturalSpline hilbert(knots, q);
            const double gap = std::abs(spline.quantile_at(t, u) - hilbert.value(t)(0));
            out.require(gap <= 1e-8, "quantile spline gap " + std::to_string(gap));
        }
    }
    out.require(accepted == 50, "could not find 50 monotone datasets");
    return out;
}

// 8. Counterexample statistics with 1e5 samples: independent coupling gives
//    |corr(X0, X1)| <= 0.01 and marginal variances within 2% of the analytic
//    curve; transport trajectories coincide exactly for repeated starts.
Outcome criterion_8() {
    Outcome out;
    const int n = 100000;
    std::mt19937_64 rng(2029);
    const ts::TrajectorySet indep = ts::generate_counterexample_trajectories(
        n, ts::TrajectorySet::Coupling::Independent, rng);

    const Eigen::VectorXd x0 = indep.values_at(0.0);
    const Eigen::VectorXd x1 = indep.values_at(1.0);
    const double m0 = x0.mean(), m1 = x1.mean();
    const double cov = ((x0.array() - m0) * (x1.array() - m1)).sum() / (n - 1);
    const double v0 = (x0.array() - m0).square().sum() / (n - 1);
    const double v1 = (x1.array() - m1).square().sum() / (n - 1);
    const double corr = cov / std::sqrt(v0 * v1);
    out.require(std::abs(corr) <= 0.01, "corr(X0, X1) = " + std::to_string(corr));

    for (double t : {0.25, 0.5, 0.75}) {
        const Eigen::VectorXd xt = indep.values_at(t);
        const double mt = xt.mean();
        const double var = (xt.array() - mt).square().sum() / (n - 1);
        const double want = (1.0 - t) * (1.0 - t) + t * t;
        out.require(std::abs(var - want) <= 0.02 * want,
                    "variance at t=" + std::to_string(t) + " off by more than 2%");
    }

    // transport kind: rebuilding from an identical seed repeats the starts,
    // and every repeated start reproduces the whole trajectory exactly
    std::mt19937_64 rng_a(77), rng_b(77);
    const ts::TrajectorySet ta = ts::generate_counterexample_trajectories(
        200, ts::TrajectorySet::Coupling::Transport, rng_a);
    const ts::TrajectorySet tb = ts::generate_counterexample_trajectories(
        200, ts::TrajectorySet::Coupling::Transport, rng_b);
    for (int s = 0; s < 200; ++s) {
        out.require(ta.value(s, 0.0) == tb.value(s, 0.0), "transport starts differ");
        for (double t : {0.1, 0.37, 0.62, 0.9}) {
            out.require(ta.value(s, t) == tb.value(s, t),
                        "repeated-start trajectories diverge at t=" + std::to_string(t));
        }
    }
    return out;
}

// 9. Thin-plate field quantiles on 30 random 8-site Gaussian fields:
//    the closed form matches the coupling-then-interpolate construction within
//    1e-8 where the std surface is positive; exact interpolation at sites.
Outcome criterion_9() {
    Outcome out;
    std::mt19937_64 rng(2030);
    std::uniform_real_distribution<double> coord(-4.0, 4.0);
    std::uniform_real_distribution<double> mean_d(-2.0, 2.0);
    std::uniform_real_distribution<double> sd_d(0.5, 1.5);
    std::uniform_real_distribution<double> level(0.02, 0.98);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Eigen::Vector2d> sites;
        for (int i = 0; i < 8; ++i) sites.emplace_back(coord(rng), coord(rng));
        std::vector<ts::Gaussian1D> gs;
        for (int i = 0; i < 8; ++i) gs.push_back({mean_d(rng), sd_d(rng)});
        const ts::MeasureField field = ts::fit_gaussian_field(sites, gs);

        for (int i = 0; i < 8; ++i) {
            out.require(std::abs(field.mean_at(sites[i]) - gs[i].mean) <= 1e-8,
                        "mean surface misses a site");
            out.require(std::abs(field.std_at(sites[i]) - gs[i].sigma) <= 1e-8,
                        "std surface misses a site");
        }

        int checked = 0;
        while (checked < 20) {
            const Eigen::Vector2d x(coord(rng), coord(rng));
            if (field.std_surface()(x) <= 0.0) continue;
            ++checked;
            const double alpha = level(rng);
            Eigen::VectorXd coupled(8);
            for (int i = 0; i < 8; ++i) {
                coupled(i) = gs[i].mean + ts::norm_quantile(alpha) * gs[i].sigma;
            }
            const ts::ThinPlateSpline surface = ts::fit_tps(sites, coupled);
            const double gap = std::abs(ts::field_quantile(field, x, alpha) - surface(x));
            out.require(gap <= 1e-8, "field quantile gap " + std::to_string(gap));
        }
    }
    return out;
}

// 10. Gaussian law propagation: Monte-Carlo covariance of 1e5 trajectories
//     within 3 standard errors at 5 random times; N = 1 matches the
//     McCann-midpoint closed form within 1e-8.
Outcome criterion_10() {
    Outcome out;
    std::mt19937_64 rng(2031);
    std::normal_distribution<double> normal(0.0, 1.0);

    const ts::TimeGrid grid({0.0, 0.3, 0.7, 1.0});
    std::vector<ts::GaussianMeasure> obs;
    for (int i = 0; i < 4; ++i) {
        Eigen::VectorXd mean(2);
        mean << normal(rng), normal(rng);
        obs.emplace_back(mean, oracles::random_spd(2, rng, 0.3, 2.0));
    }
    const ts::TransportSpline spline = ts::TransportSpline::fit(grid, obs);

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> times;
    for (int k = 0; k < 5; ++k) times.push_back(unif(rng));

    const int n = 100000;
    const Eigen::MatrixXd root = ts::sqrtm_psd(obs.front().cov()).matrix();
    std::vector<Eigen::MatrixXd> samples(times.size(), Eigen::MatrixXd(2, n));
    for (int s = 0; s < n; ++s) {
        Eigen::VectorXd z(2);
        z << normal(rng), normal(rng);
        const auto path = spline.sample_trajectory(obs.front().mean() + root * z, times);
        for (std::size_t k = 0; k < times.size(); ++k) samples[k].col(s) = path[k];
    }

    for (std::size_t k = 0; k < times.size(); ++k) {
        const ts::GaussianMeasure law = spline.gaussian_law(times[k]);
        const Eigen::VectorXd mean = samples[k].rowwise().mean();
        const Eigen::MatrixXd centered = samples[k].colwise() - mean;
        const Eigen::MatrixXd cov = centered * centered.transpose() / double(n - 1);
        for (int i = 0; i < 2; ++i) {
            const double se_mean = std::sqrt(law.cov_matrix()(i, i) / n);
            out.require(std::abs(mean(i) - law.mean()(i)) <= 3.0 * se_mean,
                        "mean outside 3 standard errors");
            for (int j = 0; j < 2; ++j) {
                const double se_cov =
                    std::sqrt((law.cov_matrix()(i, i) * law.cov_matrix()(j, j) +
                               law.cov_matrix()(i, j) * law.cov_matrix()(i, j)) /
                              n);
                out.require(std::abs(cov(i, j) - law.cov_matrix()(i, j)) <= 3.0 * se_cov,
                            "covariance outside 3 standard errors");
            }
        }
    }

    // N = 1: the law at t = 1/2 is the McCann midpoint
    for (int trial = 0; trial < 10; ++trial) {
        const ts::TimeGrid pair_grid({0.0, 1.0});
        std::vector<ts::GaussianMeasure> pair;
        for (int i = 0; i < 2; ++i) {
            Eigen::VectorXd mean(3);
            mean << normal(rng), normal(rng), normal(rng);
            pair.emplace_back(mean, oracles::random_spd(3, rng, 0.3, 2.0));
        }
        const ts::TransportSpline ps = ts::TransportSpline::fit(pair_grid, pair);
        const ts::GaussianMeasure law = ps.gaussian_law(0.5);
        const ts::LinearMap t = ts::gaussian_monge_map(pair[0], pair[1]);
        const Eigen::MatrixXd mid = 0.5 * (Eigen::MatrixXd::Identity(3, 3) + t.matrix());
        const Eigen::MatrixXd want_cov = mid * pair[0].cov_matrix() * mid.transpose();
        const Eigen::VectorXd want_mean = 0.5 * (pair[0].mean() + pair[1].mean());
        out.require((law.mean() - want_mean).norm() <= 1e-8, "midpoint mean mismatch");
        out.require((law.cov_matrix() - want_cov).norm() <= 1e-8 * want_cov.norm(),
                    "midpoint covariance mismatch");
    }
    return out;
}

struct Criterion {
    int number;
    const char* title;
    Outcome (*run)();
};

const Criterion criteria[] = {
    {1, "convergence rate (cubic, sinusoid): slope in [1.8, 2.3], error <= (58/a^3) R d^2",
     criterion_1},
    {2, "piecewise-geodesic bound: error <= 2.5 R d^2 on every mesh", criterion_2},
    {3, "Gaussian Monge pushforward <= 1e-8 relative on 500 random pairs", criterion_3},
    {4, "spline Thomas solve matches dense oracle; tridiagonal inverse bound", criterion_4},
    {5, "assignment solver equals n! enumeration on 300 cloud pairs", criterion_5},
    {6, "1D coupling composition closure within 1e-8 on 100 triples", criterion_6},
    {7, "transport-spline quantiles equal the Hilbert-space quantile spline", criterion_7},
    {8, "counterexample statistics: independent corr/variance, transport determinism",
     criterion_8},
    {9, "thin-plate field quantiles match the coupled construction", criterion_9},
    {10, "Gaussian law propagation: Monte Carlo 3-sigma + McCann midpoint", criterion_10},
};

} // namespace

int main(int argc, char** argv) {
    int selected = 0;
    if (argc > 1) selected = std::atoi(argv[1]);

    int failures = 0;
    for (const auto& c : criteria) {
        if (selected != 0 && c.number != selected) continue;
        const auto start = std::chrono::steady_clock::now();
        const Outcome outcome = c.run();
        const double elapsed = seconds_since(start);
        std::printf("[%s] %2d. %s (%.2fs)%s%s\n", outcome.pass ? "PASS" : "FAIL", c.number,
                    c.title, elapsed, outcome.pass ? "" : " -- ",
                    outcome.pass ? "" : outcome.detail.c_str());
        if (!outcome.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
