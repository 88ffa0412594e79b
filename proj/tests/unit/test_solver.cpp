#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sparselogit/errors.hpp>
#include <sparselogit/simulation.hpp>
#include <sparselogit/solver.hpp>

#include "oracles.hpp"

#include <cmath>

using namespace sparselogit;
using sparselogit::testing::proximal_gradient_oracle;
using sparselogit::testing::random_dataset;
using sparselogit::testing::random_vector;
using sparselogit::testing::scalar_objective;

namespace {

double relative_gap(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

LambdaGrid geometric_grid(double top, double ratio, std::size_t n) {
    std::vector<double> values(n);
    for (std::size_t k = 0; k < n; ++k) values[k] = top * std::pow(ratio, static_cast<double>(n - 1 - k));
    return LambdaGrid(values);
}

}  // namespace

TEST_CASE("lambda grid canonicalization") {
    const LambdaGrid grid({0.3, 0.1, 0.2});
    REQUIRE(grid.size() == 3);
    CHECK(grid[0] == 0.1);
    CHECK(grid[2] == 0.3);
    CHECK_THROWS_AS(LambdaGrid({}), ContractViolation);
    CHECK_THROWS_AS(LambdaGrid({0.1, 0.1}), ContractViolation);
    CHECK_THROWS_AS(LambdaGrid({0.0, 0.1}), ContractViolation);
    CHECK_THROWS_AS(LambdaGrid({-1.0}), ContractViolation);
    CHECK_THROWS_AS(LambdaGrid({std::nan("")}), ContractViolation);
}

TEST_CASE("lambda zero threshold") {
    Rng rng(11);
    SUBCASE("cancelling column") {
        Matrix X(2, 2);
        X << 1, 1, 1, 3;
        Vector y(2);
        y << 1, 0;
        // First column: |1/2 - 1/2| / 2 = 0; second: |1/2 - 3/2| / 2 = 1/2.
        CHECK(lambda_zero_threshold(Dataset(X, y)) == 0.5);
    }
    SUBCASE("elementwise loop") {
        for (int trial = 0; trial < 20; ++trial) {
            const Dataset data = random_dataset(15, 6, rng);
            double expected = 0.0;
            for (Eigen::Index j = 0; j < 6; ++j) {
                double s = 0.0;
                for (Eigen::Index i = 0; i < 15; ++i) s += data.X()(i, j) * (data.y()[i] - 0.5);
                expected = std::max(expected, std::abs(s) / 15.0);
            }
            CHECK(lambda_zero_threshold(data) == doctest::Approx(expected).epsilon(1e-14));
        }
    }
    SUBCASE("at and above the threshold the fit is exactly zero") {
        for (int trial = 0; trial < 20; ++trial) {
            const Dataset data = random_dataset(20, 5, rng);
            const double lambda0 = lambda_zero_threshold(data);
            for (double scale : {1.0, 1.5, 10.0}) {
                const PathPoint point = fit_single(data, lambda0 * scale, random_vector(5, rng));
                CHECK(point.converged);
                CHECK(point.beta.isZero(0.0));
            }
        }
    }
}

TEST_CASE("kkt residual formula") {
    Rng rng(12);
    const Dataset data = random_dataset(30, 4, rng);
    const Vector g0 = gradient(data, Vector::Zero(4));
    const double top = g0.lpNorm<Eigen::Infinity>();
    CHECK(kkt_residual(data, Vector::Zero(4), top) == 0.0);
    CHECK(kkt_residual(data, Vector::Zero(4), 2.0 * top) == 0.0);
    CHECK(kkt_residual(data, Vector::Zero(4), top / 2.0) == doctest::Approx(top / 2.0).epsilon(1e-15));

    const Vector beta = random_vector(4, rng);
    const Vector g = gradient(data, beta);
    double expected = 0.0;
    for (Eigen::Index j = 0; j < 4; ++j) {
        expected = std::max(expected, std::abs(g[j] + 0.1 * (beta[j] > 0 ? 1.0 : -1.0)));
    }
    CHECK(kkt_residual(data, beta, 0.1) == doctest::Approx(expected).epsilon(1e-14));
    CHECK_THROWS_AS(kkt_residual(data, beta, 0.0), ContractViolation);
}

TEST_CASE("fit_single matches an independent proximal-gradient oracle") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const Dataset data = random_dataset(20, 5, rng);
        const double lambda = 0.05;
        const Vector oracle = proximal_gradient_oracle(data.X(), data.y(), lambda);
        SolverOptions options;
        options.tol = 1e-10;
        const PathPoint point = fit_single(data, lambda, Vector::Zero(5), options);
        CHECK(point.converged);
        CHECK(point.kkt_residual <= 1e-10);
        const double ours = static_cast<double>(scalar_objective(data.X(), data.y(), point.beta, lambda));
        const double ref = static_cast<double>(scalar_objective(data.X(), data.y(), oracle, lambda));
        CHECK(relative_gap(ours, ref) <= 1e-8);
    }
}

TEST_CASE("fit_single certificate and descent") {
    Rng rng(14);
    for (int trial = 0; trial < 30; ++trial) {
        const Dataset data = random_dataset(40, 12, rng, 1.5);
        const double lambda = 0.1 * lambda_zero_threshold(data);
        const Vector init = random_vector(12, rng, 0.5);
        SolverOptions options;
        options.tol = 1e-8;
        const PathPoint point = fit_single(data, lambda, init, options);
        CHECK(point.converged);
        CHECK(point.kkt_residual <= 1e-8);
        CHECK(kkt_residual(data, point.beta, lambda) == doctest::Approx(point.kkt_residual).epsilon(1e-12));
        CHECK(penalized_objective(data, point.beta, lambda) <= penalized_objective(data, init, lambda));
    }
}

TEST_CASE("non-convergence is reported, not thrown") {
    Rng rng(15);
    const Dataset data = random_dataset(50, 20, rng, 2.0);
    SolverOptions options;
    options.tol = 1e-14;
    options.max_iter = 1;
    const Vector init = Vector::Zero(20);
    const double lambda = 1e-3;
    PathPoint point;
    CHECK_NOTHROW(point = fit_single(data, lambda, init, options));
    CHECK_FALSE(point.converged);
    CHECK(point.kkt_residual > options.tol);
    CHECK(penalized_objective(data, point.beta, lambda) <= penalized_objective(data, init, lambda));
}

TEST_CASE("duplicated columns keep the optimal objective") {
    Rng rng(16);
    const Dataset base = random_dataset(60, 4, rng, 3.0, 2);
    Matrix X(60, 5);
    X << base.X(), base.X().col(0);
    const Dataset data(X, base.y());
    const double lambda = 0.02;
    SolverOptions options;
    options.tol = 1e-10;
    const PathPoint point = fit_single(data, lambda, Vector::Zero(5), options);
    CHECK(point.converged);
    CHECK(std::isfinite(std::abs(point.beta[0]) + std::abs(point.beta[4])));
    const Vector oracle = proximal_gradient_oracle(X, data.y(), lambda);
    CHECK(relative_gap(penalized_objective(data, point.beta, lambda),
                       penalized_objective(data, oracle, lambda)) <= 1e-8);
}

TEST_CASE("fit_path") {
    Rng rng(17);
    SUBCASE("grid above the zero threshold gives all zeros") {
        const Dataset data = random_dataset(25, 6, rng);
        const double lambda0 = lambda_zero_threshold(data);
        const RegularizationPath path = fit_path(data, LambdaGrid({lambda0, 2 * lambda0, 3 * lambda0}));
        REQUIRE(path.points.size() == 3);
        for (const PathPoint& point : path.points) CHECK(point.beta.isZero(0.0));
    }
    SUBCASE("single-point grid equals fit_single from zero") {
        const Dataset data = random_dataset(25, 6, rng);
        const double lambda = 0.3 * lambda_zero_threshold(data);
        const RegularizationPath path = fit_path(data, LambdaGrid({lambda}));
        const PathPoint single = fit_single(data, lambda, Vector::Zero(6));
        CHECK(path.points[0].beta == single.beta);
        CHECK(path.points[0].iterations == single.iterations);
    }
    SUBCASE("points are aligned ascending with the grid") {
        const Dataset data = random_dataset(25, 6, rng);
        const LambdaGrid grid = geometric_grid(lambda_zero_threshold(data), 0.7, 8);
        const RegularizationPath path = fit_path(data, grid);
        for (std::size_t k = 0; k < grid.size(); ++k) CHECK(path.points[k].lambda == grid[k]);
    }
}

TEST_CASE("property: warm and cold starts agree, l1 norm non-increasing in lambda") {
    Rng rng(18);
    for (int trial = 0; trial < 50; ++trial) {
        const Dataset data = random_dataset(30, 10, rng, 1.5);
        const LambdaGrid grid = geometric_grid(lambda_zero_threshold(data), 0.8, 15);
        SolverOptions options;
        options.tol = 1e-9;
        const RegularizationPath path = fit_path(data, grid, options);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const PathPoint& warm = path.points[k];
            REQUIRE(warm.converged);
            const PathPoint cold = fit_single(data, grid[k], Vector::Zero(10), options);
            REQUIRE(cold.converged);
            CHECK(relative_gap(penalized_objective(data, warm.beta, grid[k]),
                               penalized_objective(data, cold.beta, grid[k])) <= 1e-8);
            if (k + 1 < grid.size()) {
                CHECK(path.points[k + 1].beta.lpNorm<1>() <= warm.beta.lpNorm<1>() + 1e-6);
            }
        }
    }
}

TEST_CASE("penalty factor leaves an intercept column unpenalized") {
    Rng rng(19);
    const Dataset base = random_dataset(80, 3, rng);
    Matrix X(80, 4);
    X << Vector::Ones(80), base.X();
    Vector y = base.y();
    for (Eigen::Index i = 0; i < 60; ++i) y[i] = 1.0;  // strongly unbalanced
    const Dataset data(X, y);
    SolverOptions options;
    options.penalty_factor = {0.0, 1.0, 1.0, 1.0};
    options.tol = 1e-9;
    const PathPoint point = fit_single(data, 10.0, Vector::Zero(4), options);
    CHECK(point.converged);
    // Huge lambda: only the intercept is free, and it solves mean(p) = mean(y).
    CHECK(point.beta.tail(3).isZero(0.0));
    CHECK(point.beta[0] == doctest::Approx(std::log(y.mean() / (1.0 - y.mean()))).epsilon(1e-7));
}
