#pragma once

// Test-only reference implementations, kept independent of the library's
// computation paths: dense linear-system spline fitting, brute-force
// assignment enumeration, and random problem generators.

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

/// Natural cubic spline evaluated via a dense full-pivot LU solve of the
/// interior second-derivative system (no Thomas sweep anywhere).
class DenseNaturalSpline {
public:
    DenseNaturalSpline(std::vector<double> knots, Eigen::MatrixXd points)
        : knots_(std::move(knots)), x_(std::move(points)) {
        const int n = static_cast<int>(knots_.size()) - 1;
        m_ = Eigen::MatrixXd::Zero(x_.rows(), n + 1);
        if (n >= 2) {
            const int sz = n - 1;
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(sz, sz);
            Eigen::MatrixXd rhs(sz, x_.rows());
            for (int i = 1; i < n; ++i) {
                const double dl = knots_[i] - knots_[i - 1];
                const double dr = knots_[i + 1] - knots_[i];
                t(i - 1, i - 1) = 2.0 * (dl + dr);
                if (i > 1) t(i - 1, i - 2) = dl;
                if (i < n - 1) t(i - 1, i) = dr;
                rhs.row(i - 1) =
                    6.0 * ((x_.col(i + 1) - x_.col(i)) / dr - (x_.col(i) - x_.col(i - 1)) / dl)
                        .transpose();
            }
            const Eigen::MatrixXd sol = Eigen::FullPivLU<Eigen::MatrixXd>(t).solve(rhs);
            for (int i = 1; i < n; ++i) m_.col(i) = sol.row(i - 1).transpose();
        }
    }

    [[nodiscard]] Eigen::VectorXd value(double t) const {
        const int i = interval(t);
        const double h = knots_[i] - knots_[i - 1];
        const double s = t - knots_[i - 1];
        const Eigen::VectorXd a = (m_.col(i) - m_.col(i - 1)) / (6.0 * h);
        const Eigen::VectorXd b = 0.5 * m_.col(i - 1);
        const Eigen::VectorXd c =
            (x_.col(i) - x_.col(i - 1)) / h - (m_.col(i) + 2.0 * m_.col(i - 1)) * h / 6.0;
        return ((a * s + b) * s + c) * s + x_.col(i - 1);
    }

    [[nodiscard]] Eigen::VectorXd second_derivative(int knot) const { return m_.col(knot); }

private:
    [[nodiscard]] int interval(double t) const {
        const int n = static_cast<int>(knots_.size()) - 1;
        int i = 1;
        while (i < n && t >= knots_[i]) ++i;
        return i;
    }

    std::vector<double> knots_;
    Eigen::MatrixXd x_;
    Eigen::MatrixXd m_;
};

/// Minimal assignment cost by enumerating all n! permutations.
inline double brute_force_assignment_cost(const Eigen::MatrixXd& src, const Eigen::MatrixXd& dst) {
    const int n = static_cast<int>(src.rows());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (int k = 0; k < n; ++k) {
            cost += (src.row(k) - dst.row(perm[k])).squaredNorm();
        }
        best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Random symmetric matrix with eigenvalues drawn uniformly from [lo, hi].
inline Eigen::MatrixXd random_spd(int d, std::mt19937_64& rng, double lo = 0.1, double hi = 3.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) g(i, j) = normal(rng);
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ();
    std::uniform_real_distribution<double> eig(lo, hi);
    Eigen::VectorXd vals(d);
    for (int i = 0; i < d; ++i) vals(i) = eig(rng);
    const Eigen::MatrixXd m = q * vals.asDiagonal() * q.transpose();
    return 0.5 * (m + m.transpose());
}

/// Random strictly increasing grid on [0, 1] with n intervals and mesh ratio
/// at least min_ratio (interval lengths uniform in [min_ratio, 1], rescaled).
inline std::vector<double> random_grid(int n, std::mt19937_64& rng, double min_ratio = 0.2) {
    std::uniform_real_distribution<double> len(min_ratio, 1.0);
    std::vector<double> knots(n + 1, 0.0);
    for (int i = 1; i <= n; ++i) knots[i] = knots[i - 1] + len(rng);
    for (auto& t : knots) t /= knots[n];
    knots[n] = 1.0;
    return knots;
}

} // namespace oracles
