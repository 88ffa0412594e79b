#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sparselogit/errors.hpp>
#include <sparselogit/simulation.hpp>

#include <cmath>

using namespace sparselogit;

TEST_CASE("design generator") {
    SUBCASE("kappa = 0: unit variances and zero means within 5 sigma at n = 10000") {
        const Matrix X = generate_design(10'000, 5, 0.0, 1);
        for (Eigen::Index j = 0; j < 5; ++j) {
            const double mean = X.col(j).mean();
            const double var = (X.col(j).array() - mean).square().sum() / 9'999.0;
            CHECK(std::abs(mean) <= 5.0 / 100.0);
            // sd of the sample variance of a normal is sqrt(2 / (n - 1)).
            CHECK(std::abs(var - 1.0) <= 5.0 * std::sqrt(2.0 / 9'999.0));
        }
    }
    SUBCASE("kappa = 0.75: pairwise correlations within 0.03") {
        const Matrix X = generate_design(10'000, 4, 0.75, 2);
        const Matrix centered = X.rowwise() - X.colwise().mean();
        const Matrix cov = centered.transpose() * centered / 9'999.0;
        for (Eigen::Index a = 0; a < 4; ++a) {
            CHECK(std::abs(X.col(a).mean()) <= 5.0 / 100.0);
            for (Eigen::Index b = a + 1; b < 4; ++b) {
                const double corr = cov(a, b) / std::sqrt(cov(a, a) * cov(b, b));
                CHECK(std::abs(corr - 0.75) <= 0.03);
            }
        }
    }
    SUBCASE("seeded") {
        CHECK(generate_design(20, 6, 0.5, 9) == generate_design(20, 6, 0.5, 9));
        CHECK(generate_design(20, 6, 0.5, 9) != generate_design(20, 6, 0.5, 10));
    }
    SUBCASE("kappa outside [0, 1)") {
        CHECK_THROWS_AS(generate_design(5, 2, 1.0, 1), ParameterError);
        CHECK_THROWS_AS(generate_design(5, 2, -0.1, 1), ParameterError);
    }
}

TEST_CASE("sparse truth") {
    const SparseTruth none = generate_truth(10, 0, 1);
    CHECK(none.support.empty());
    CHECK(none.beta_star.isZero(0.0));

    const SparseTruth all = generate_truth(7, 7, 2);
    CHECK(all.support.size() == 7);
    for (Eigen::Index j = 0; j < 7; ++j) CHECK(std::abs(all.beta_star[j]) == 1.0);

    const SparseTruth some = generate_truth(30, 5, 3);
    CHECK(some.support.size() == 5);
    CHECK(std::is_sorted(some.support.begin(), some.support.end()));
    CHECK(support_of(some.beta_star) == some.support);

    CHECK_THROWS_AS(generate_truth(3, 4, 1), ParameterError);

    std::size_t plus = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 2'000; ++seed) {
        const SparseTruth t = generate_truth(20, 5, seed);
        for (std::size_t j : t.support) {
            plus += t.beta_star[static_cast<Eigen::Index>(j)] > 0 ? 1 : 0;
            ++total;
        }
    }
    CHECK(total == 10'000);
    const double frac = static_cast<double>(plus) / static_cast<double>(total);
    CHECK(frac > 0.48);
    CHECK(frac < 0.52);
}

TEST_CASE("response generator") {
    const Matrix X = generate_design(10'000, 3, 0.0, 4);
    const Vector y = generate_response(X, Vector::Zero(3), 5);
    CHECK(y.mean() > 0.48);
    CHECK(y.mean() < 0.52);
    CHECK(generate_response(X, Vector::Zero(3), 5) == y);

    Matrix ones = Matrix::Ones(1'000, 1);
    Vector beta(1);
    beta << 20.0;
    CHECK(generate_response(ones, beta, 6).sum() >= 999.0);
    CHECK_THROWS_AS(generate_response(X, Vector::Zero(2), 5), ContractViolation);
}

TEST_CASE("default grid") {
    const LambdaGrid grid = default_grid(200, 200, 500);
    CHECK(grid.size() == 500);
    CHECK(grid.back() == doctest::Approx(0.264916).epsilon(1e-6));
    CHECK(grid.front() == doctest::Approx(2.64916e-5).epsilon(1e-5));
    CHECK(grid.back() == 10.0 * std::log(200.0) / 200.0);
    const double step = grid[1] - grid[0];
    for (std::size_t k = 1; k < grid.size(); ++k)
        CHECK(std::abs((grid[k] - grid[k - 1]) - step) <= 1e-12 * grid.back() + 1e-12 * step * 1e3);

    const LambdaGrid two = default_grid(200, 200, 2);
    CHECK(two.size() == 2);
    CHECK(two[0] == doctest::Approx(1e-4 * two[1]));
    CHECK_THROWS_AS(default_grid(200, 1, 10), ParameterError);
}

TEST_CASE("hamming distance") {
    CHECK(hamming_distance({1, 2, 3}, {1, 2, 3}) == 0);
    CHECK(hamming_distance({}, {0, 4, 7}) == 3);
    CHECK(hamming_distance({1, 2, 3}, {3, 4}) == 3);

    Rng rng(7);
    std::bernoulli_distribution coin(0.4);
    auto random_set = [&] {
        IndexSet s;
        for (std::size_t j = 0; j < 12; ++j)
            if (coin(rng)) s.push_back(j);
        return s;
    };
    for (int trial = 0; trial < 300; ++trial) {
        const IndexSet a = random_set(), b = random_set(), c = random_set();
        CHECK(hamming_distance(a, b) == hamming_distance(b, a));
        CHECK(hamming_distance(a, c) <= hamming_distance(a, b) + hamming_distance(b, c));
    }
}

TEST_CASE("experiment runner") {
    SimulationConfig config;
    config.n = 60;
    config.p = 20;
    config.s = 2;
    config.kappa = 0.3;
    config.n_lambda = 60;
    config.n_reps = 4;
    config.folds = 3;
    config.seed = 17;

    SUBCASE("null truth: mean Hamming equals mean model size") {
        config.s = 0;
        config.methods = {Method::Testing};
        const auto summary = run_experiment(config);
        CHECK(summary.methods[0].hamming.mean == summary.methods[0].model_size.mean);
    }
    SUBCASE("one replication has zero sd") {
        config.n_reps = 1;
        const auto summary = run_experiment(config);
        for (const MethodSummary& m : summary.methods) {
            CHECK(m.hamming.sd == 0.0);
            CHECK(m.model_size.sd == 0.0);
        }
    }
    SUBCASE("deterministic and independent of threads") {
        const auto a = run_experiment(config, {1, false});
        const auto b = run_experiment(config, {3, false});
        REQUIRE(a.records.size() == b.records.size());
        for (std::size_t k = 0; k < a.records.size(); ++k) {
            CHECK(a.records[k].lambda == b.records[k].lambda);
            CHECK(a.records[k].hamming == b.records[k].hamming);
            CHECK_FALSE(a.records[k].seconds);
        }
    }
    SUBCASE("adding replications keeps earlier ones") {
        const auto a = run_experiment(config);
        config.n_reps = 6;
        const auto b = run_experiment(config);
        for (std::size_t k = 0; k < a.records.size(); ++k) {
            CHECK(a.records[k].lambda == b.records[k].lambda);
            CHECK(a.records[k].hamming == b.records[k].hamming);
        }
    }
    SUBCASE("timing mode records times with the same selections") {
        const auto plain = run_experiment(config);
        const auto timed = run_experiment(config, {1, true});
        for (std::size_t k = 0; k < plain.records.size(); ++k) {
            CHECK(plain.records[k].lambda == timed.records[k].lambda);
            REQUIRE(timed.records[k].seconds);
            CHECK(*timed.records[k].seconds >= 0.0);
        }
        for (const MethodSummary& m : timed.methods) CHECK(m.median_seconds);
    }
    SUBCASE("invalid configurations") {
        config.kappa = 1.0;
        CHECK_THROWS_AS(run_experiment(config), ParameterError);
        config.kappa = 0.0;
        config.s = 21;
        CHECK_THROWS_AS(run_experiment(config), ParameterError);
        config.s = 2;
        config.n_reps = 0;
        CHECK_THROWS_AS(run_experiment(config), ParameterError);
    }
}

TEST_CASE("property: the path family contains the true support") {
    const std::size_t n = 200, p = 50, s = 3, reps = 30;
    const LambdaGrid grid = default_grid(n, p, 500);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        const Matrix X = generate_design(n, p, 0.0, derive_seed(55, {r, 1}));
        const SparseTruth truth = generate_truth(p, s, derive_seed(55, {r, 2}));
        const Dataset data(X, generate_response(X, truth.beta_star, derive_seed(55, {r, 3})));
        const RegularizationPath path = fit_path(data, grid);
        bool found = false;
        for (const PathPoint& point : path.points) found = found || support_of(point.beta) == truth.support;
        hits += found ? 1 : 0;
    }
    CHECK(static_cast<double>(hits) >= 0.9 * static_cast<double>(reps));
}
