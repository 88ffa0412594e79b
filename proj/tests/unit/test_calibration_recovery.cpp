#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sparselogit/calibration.hpp>
#include <sparselogit/simulation.hpp>

#include <cstdio>

using namespace sparselogit;

// Strong-signal design: every true coefficient is +-10.
TEST_CASE("strong signal recovers the exact support in a majority of replications") {
    const std::size_t n = 200, p = 50, s = 3, reps = 20;
    const LambdaGrid grid = default_grid(n, p, 500);
    std::size_t exact = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        const Matrix X = generate_design(n, p, 0.0, derive_seed(2024, {r, 1}));
        SparseTruth truth = generate_truth(p, s, derive_seed(2024, {r, 2}));
        truth.beta_star *= 10.0;
        const Vector y = generate_response(X, truth.beta_star, derive_seed(2024, {r, 3}));
        const CalibrationResult result = calibrate(Dataset(X, y), grid);
        if (result.support_hat == truth.support) ++exact;
    }
    std::printf("exact recovery: %zu / %zu\n", exact, reps);
    CHECK(2 * exact > reps);
}
