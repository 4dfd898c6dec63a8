#include "surftrap/nelder_mead.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace surftrap;

namespace {

NelderMeadConfig tight() {
    NelderMeadConfig c;
    c.x_tol = 1e-11;
    c.f_tol = 1e-22;
    c.max_iter = 20000;
    c.max_evals = 40000;
    return c;
}

}  // namespace

TEST(NelderMead, Rosenbrock) {
    const auto f = [](const Eigen::VectorXd& x) {
        return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2);
    };
    auto r = nelder_mead(f, Eigen::Vector2d(-1.2, 1.0), Eigen::Vector2d(0.1, 0.1), tight());
    // One restart from the converged point clears any simplex collapse.
    r = nelder_mead(f, r.x, Eigen::Vector2d(0.01, 0.01), tight());
    EXPECT_TRUE(r.converged);
    EXPECT_LT((r.x - Eigen::Vector2d(1, 1)).norm(), 1e-8);
}

TEST(NelderMead, RandomSpdQuadratics) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 4;
        Eigen::MatrixXd B(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) B(i, j) = g(rng);
        const Eigen::MatrixXd A = B * B.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd xs(n);
        for (int i = 0; i < n; ++i) xs(i) = g(rng);
        const auto f = [&](const Eigen::VectorXd& x) { return 0.5 * (x - xs).dot(A * (x - xs)); };
        auto r = nelder_mead(f, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Constant(n, 0.5), tight());
        r = nelder_mead(f, r.x, Eigen::VectorXd::Constant(n, 1e-3), tight());
        EXPECT_LT((r.x - xs).norm(), 1e-8) << trial;
    }
}

TEST(NelderMead, InfeasibleRegionsAreAvoided) {
    const auto f = [](const Eigen::VectorXd& x) {
        if (x(0) < 0.5) return std::numeric_limits<double>::infinity();
        if (x(1) > 3.0) return std::numeric_limits<double>::quiet_NaN();
        return std::pow(x(0) - 0.2, 2) + std::pow(x(1) - 1.0, 2);
    };
    auto r = nelder_mead(f, Eigen::Vector2d(2, 2), Eigen::Vector2d(0.3, 0.3), tight());
    EXPECT_TRUE(std::isfinite(r.f));
    // A simplex pressed against a wall can stall; restarts slide along it.
    for (int k = 0; k < 5; ++k) r = nelder_mead(f, r.x, Eigen::Vector2d(0.05, 0.05), tight());
    EXPECT_GE(r.x(0), 0.5);
    EXPECT_NEAR(r.x(0), 0.5, 1e-6);
    EXPECT_NEAR(r.x(1), 1.0, 1e-6);
}

TEST(NelderMead, ThreadCountDoesNotChangeTheResult) {
    const auto f = [](const Eigen::VectorXd& x) { return std::pow(x(0) - 3, 2) + 2 * std::pow(x(1) + 1, 2) + x(0) * x(1); };
    NelderMeadConfig a = tight(), b = tight();
    b.threads = 3;
    const auto ra = nelder_mead(f, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), a);
    const auto rb = nelder_mead(f, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), b);
    EXPECT_EQ(ra.x, rb.x);
    EXPECT_EQ(ra.evaluations, rb.evaluations);
}

TEST(NelderMead, Validation) {
    NelderMeadConfig c;
    c.contraction = 1.5;
    const auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
    EXPECT_THROW(nelder_mead(f, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), c), InputError);
    EXPECT_THROW(nelder_mead(f, std::vector<Eigen::VectorXd>{Eigen::Vector2d(0, 0)}, {}), InputError);
    NelderMeadConfig e;
    e.max_evals = 10;
    const auto r = nelder_mead(f, Eigen::Vector2d(5, 5), Eigen::Vector2d(1, 1), e);
    EXPECT_FALSE(r.converged);
    EXPECT_LE(r.evaluations, 12);
}
