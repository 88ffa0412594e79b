#pragma once

#include <sparselogit/model.hpp>
#include <sparselogit/solver.hpp>

#include <cstdint>
#include <vector>

namespace sparselogit {

inline constexpr double kDefaultConstantC = 1.5;

/// One scanned grid point of the pairwise sup-norm test.
///
/// statistic = max_{lambda' >= lambda} ||b_lambda' - b_lambda||_inf / (lambda' + lambda) - C,
/// the contribution of the pairs that involve `lambda` itself. `passed`
/// records whether every pair among the grid points >= lambda passes, i.e.
/// the running maximum of `statistic` from the top of the grid is <= 0.
struct TestRecord {
    std::size_t index = 0;
    double lambda = 0.0;
    double statistic = 0.0;
    bool passed = false;
};

struct TestingSelection {
    double lambda_hat = 0.0;
    std::size_t lambda_index = 0;
    std::vector<TestRecord> trace;  // descending lambda order
};

struct CalibrationResult {
    double lambda_hat = 0.0;
    std::size_t lambda_index = 0;
    Coefficients beta_hat;
    IndexSet support_hat;
    double constant_c = kDefaultConstantC;
    std::vector<TestRecord> test_trace;  // descending lambda order
    // Number of grid points the solver actually fitted.
    std::size_t fitted_points = 0;
};

/// Testing-based selection on an already fitted path.
///
/// lambda_hat is the smallest grid value such that every pair lambda', lambda''
/// >= lambda_hat satisfies ||b_lambda' - b_lambda''||_inf / (lambda' + lambda'') <= C.
/// Every grid point is evaluated; the trace covers the whole grid. Throws
/// CalibrationError when a point that decides the selection did not converge.
///
/// `tested` restricts the sup-norm to a subset of coordinates (empty = all).
TestingSelection select_lambda_testing(const RegularizationPath& path, double constant_c,
                                       const IndexSet& tested = {});

// {j : beta_j != 0 and |beta_j| >= 3 C lambda_hat}
IndexSet thresholded_support(const Coefficients& beta_hat, double constant_c, double lambda_hat,
                             const IndexSet& tested = {});

/// Fits the path lazily from the largest lambda down and stops at the first
/// grid point whose tests against the already fitted points fail.
///
/// Returns the same selection as select_lambda_testing on the full path. A
/// non-converged fit before the selection is decided throws CalibrationError.
CalibrationResult calibrate(const Dataset& data, const LambdaGrid& grid,
                            double constant_c = kDefaultConstantC,
                            const SolverOptions& options = {}, const IndexSet& tested = {});

namespace validation {

struct OracleRequest {
    double delta = 0.1;
    std::size_t n_draws = 1000;
    double gamma = 1.0;
    Coefficients truth;
};

struct OracleLambda {
    double lambda_star = 0.0;
    std::size_t lambda_index = 0;
    // Empirical probability of the noise event, one entry per grid value.
    std::vector<double> coverage;
};

/// Monte-Carlo estimate of the oracle tuning parameter: the smallest grid
/// lambda at which the noise event 4 (2 - gamma) ||X' eps||_inf / (n gamma) <= lambda
/// holds with empirical frequency >= 1 - delta. Responses are redrawn from
/// the logistic model at `truth`; eps = y - p(truth).
///
/// Draw d uses a stream derived from (seed, d), so the result does not depend
/// on `threads`. Throws CalibrationError when no grid value reaches the
/// required coverage.
OracleLambda estimate_oracle_lambda(const Matrix& X, const OracleRequest& request,
                                    const LambdaGrid& grid, std::uint64_t seed,
                                    unsigned threads = 1);

}  // namespace validation

}  // namespace sparselogit
