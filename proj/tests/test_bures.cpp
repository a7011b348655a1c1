#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "tsplines/bures.hpp"

using namespace tsplines;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

} // namespace

TEST_CASE("SymPsdMatrix validates symmetry and positivity") {
    CHECK_THROWS_AS(SymPsdMatrix(mat2(1.0, 0.5, 0.2, 1.0)), NonSymmetric);
    CHECK_THROWS_AS(SymPsdMatrix(mat2(1.0, 2.0, 2.0, 1.0)), NotPsd); // eigenvalues 3, -1
    const SymPsdMatrix ok(mat2(2.0, 1.0, 1.0, 2.0));
    CHECK(ok.min_eigenvalue() == Catch::Approx(1.0));
}

TEST_CASE("sqrtm_psd on identity and diagonal matrices") {
    const SymPsdMatrix eye(Eigen::MatrixXd::Identity(2, 2));
    CHECK(sqrtm_psd(eye).matrix().isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-14));

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    const Eigen::MatrixXd root = sqrtm_psd(SymPsdMatrix(d)).matrix();
    CHECK(root(0, 0) == Catch::Approx(2.0));
    CHECK(root(1, 1) == Catch::Approx(3.0));
    CHECK(std::abs(root(0, 1)) < 1e-14);
}

TEST_CASE("sqrtm_psd dense case against eigendecomposition") {
    // [[2,1],[1,2]] has eigenvalues 3 and 1 with eigenvectors (1,1), (1,-1):
    // S = [[(sqrt3+1)/2, (sqrt3-1)/2], [(sqrt3-1)/2, (sqrt3+1)/2]].
    const Eigen::MatrixXd a = mat2(2.0, 1.0, 1.0, 2.0);
    const Eigen::MatrixXd s = sqrtm_psd(SymPsdMatrix(a)).matrix();
    const double hi = (std::sqrt(3.0) + 1.0) / 2.0;
    const double lo = (std::sqrt(3.0) - 1.0) / 2.0;
    CHECK(s(0, 0) == Catch::Approx(hi).epsilon(1e-12));
    CHECK(s(0, 1) == Catch::Approx(lo).epsilon(1e-12));
    CHECK(((s * s) - a).norm() <= 1e-9 * std::max(1.0, a.norm()));
}

TEST_CASE("sqrtm_psd residual bound on random matrices") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 6);
        const Eigen::MatrixXd a = oracles::random_spd(d, rng, 0.0, 5.0);
        const Eigen::MatrixXd s = sqrtm_psd(SymPsdMatrix(a)).matrix();
        CHECK((s * s - a).norm() <= 1e-9 * std::max(1.0, a.norm()));
    }
}

TEST_CASE("gaussian_monge_map identity and diagonal cases") {
    const GaussianMeasure g = GaussianMeasure::centered(mat2(2.0, 0.5, 0.5, 1.0));
    const LinearMap id_map = gaussian_monge_map(g, g);
    CHECK(id_map.matrix().isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-10));
    CHECK(id_map.offset().norm() < 1e-10);

    Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(2, 2);
    s1(0, 0) = 1.0;
    s1(1, 1) = 4.0;
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(2, 2);
    s2(0, 0) = 4.0;
    s2(1, 1) = 1.0;
    const LinearMap t = gaussian_monge_map(GaussianMeasure::centered(s1),
                                           GaussianMeasure::centered(s2));
    CHECK(t.matrix()(0, 0) == Catch::Approx(2.0));
    CHECK(t.matrix()(1, 1) == Catch::Approx(0.5));
    const Eigen::MatrixXd pushed = t.matrix() * s1 * t.matrix().transpose();
    CHECK((pushed - s2).norm() <= 1e-10);
}

TEST_CASE("gaussian_monge_map between the alternating pair of the sawtooth figure") {
    Eigen::VectorXd m1(2), m2(2);
    m1 << 0.0, 0.0;
    m2 << 7.0, 7.0;
    const GaussianMeasure src(m1, mat2(4.0, 0.0, 0.0, 2.0));
    const GaussianMeasure dst(m2, mat2(2.0, 0.0, 0.0, 4.0));
    const LinearMap t = gaussian_monge_map(src, dst);
    CHECK(t.matrix()(0, 0) == Catch::Approx(1.0 / std::sqrt(2.0)));
    CHECK(t.matrix()(1, 1) == Catch::Approx(std::sqrt(2.0)));
    CHECK(std::abs(t.matrix()(0, 1)) < 1e-12);
    CHECK((t.offset() - (m2 - t.matrix() * m1)).norm() < 1e-12);
}

TEST_CASE("gaussian_monge_map rejects degenerate sources") {
    Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(2, 2);
    flat(0, 0) = 1.0;
    const GaussianMeasure degenerate = GaussianMeasure::centered(flat);
    const GaussianMeasure target = GaussianMeasure::centered(Eigen::MatrixXd::Identity(2, 2));
    CHECK(degenerate.is_degenerate());
    CHECK_THROWS_AS(gaussian_monge_map(degenerate, target), DegenerateSource);
}

TEST_CASE("bures distance closed-form cases") {
    const GaussianMeasure a = GaussianMeasure::scalar(0.0, 1.0);
    CHECK(bures_wasserstein_distance(a, a) == Catch::Approx(0.0).margin(1e-12));

    // 1D: |sigma_0 - sigma_1|
    const GaussianMeasure b = GaussianMeasure::scalar(0.0, 9.0);
    CHECK(bures_wasserstein_distance(a, b) == Catch::Approx(2.0).epsilon(1e-12));

    // pure mean shift: Euclidean distance of the means
    Eigen::VectorXd shift(2);
    shift << 3.0, 4.0;
    const GaussianMeasure c(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
    const GaussianMeasure d(shift, Eigen::MatrixXd::Identity(2, 2));
    CHECK(bures_wasserstein_distance(c, d) == Catch::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("bures distance 1D reduction with means") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    std::uniform_real_distribution<double> pos(0.2, 2.5);
    for (int trial = 0; trial < 30; ++trial) {
        const double m0 = unif(rng), m1 = unif(rng);
        const double s0 = pos(rng), s1 = pos(rng);
        const double got = bures_wasserstein_distance(GaussianMeasure::scalar(m0, s0 * s0),
                                                      GaussianMeasure::scalar(m1, s1 * s1));
        const double want = std::hypot(m0 - m1, s0 - s1);
        CHECK(got == Catch::Approx(want).margin(1e-10));
    }
}

TEST_CASE("bures distance symmetry and triangle inequality") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> normal(0.0, 2.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 4);
        auto sample = [&] {
            Eigen::VectorXd mean(d);
            for (int i = 0; i < d; ++i) mean(i) = normal(rng);
            return GaussianMeasure(mean, oracles::random_spd(d, rng));
        };
        const GaussianMeasure a = sample(), b = sample(), c = sample();
        const double ab = bures_wasserstein_distance(a, b);
        const double ba = bures_wasserstein_distance(b, a);
        CHECK(std::abs(ab - ba) <= 1e-9);
        const double ac = bures_wasserstein_distance(a, c);
        const double cb = bures_wasserstein_distance(c, b);
        CHECK(ab <= ac + cb + 1e-9);
    }
}

TEST_CASE("pushforward basics") {
    const GaussianMeasure g = GaussianMeasure::centered(mat2(1.5, 0.3, 0.3, 0.8));
    const GaussianMeasure same = pushforward(LinearMap::identity(2), g);
    CHECK(same.mean().isZero(1e-14));
    CHECK(same.cov_matrix().isApprox(g.cov_matrix(), 1e-14));

    const LinearMap doubling(2.0 * Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2));
    const GaussianMeasure scaled =
        pushforward(doubling, GaussianMeasure::centered(Eigen::MatrixXd::Identity(2, 2)));
    CHECK(scaled.cov_matrix().isApprox(4.0 * Eigen::MatrixXd::Identity(2, 2), 1e-14));

    CHECK_THROWS_AS(pushforward(LinearMap::identity(3), g), DimensionMismatch);
}

TEST_CASE("Monge map pushes source to destination, round trip") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal(0.0, 1.5);
    for (int trial = 0; trial < 60; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 6);
        Eigen::VectorXd mean_a(d), mean_b(d);
        for (int i = 0; i < d; ++i) {
            mean_a(i) = normal(rng);
            mean_b(i) = normal(rng);
        }
        const GaussianMeasure a(mean_a, oracles::random_spd(d, rng));
        const GaussianMeasure b(mean_b, oracles::random_spd(d, rng));

        const LinearMap t = gaussian_monge_map(a, b);
        const GaussianMeasure pushed = pushforward(t, a);
        CHECK((pushed.mean() - b.mean()).norm() <= 1e-8 * std::max(1.0, b.mean().norm()));
        CHECK((pushed.cov_matrix() - b.cov_matrix()).norm() <= 1e-8 * b.cov_matrix().norm());

        // Monge maps between non-degenerate Gaussians are mutual inverses.
        const LinearMap back = gaussian_monge_map(b, a);
        const LinearMap round = back.compose(t);
        CHECK((round.matrix() - Eigen::MatrixXd::Identity(d, d)).norm() <= 1e-8);
        CHECK(round.offset().norm() <= 1e-8 * std::max(1.0, mean_a.norm()));
        CHECK((t.matrix() - back.inverse().matrix()).norm() <= 1e-8 * t.matrix().norm());

        // The map matrix is symmetric positive definite.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.matrix(), Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}
