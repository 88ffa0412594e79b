#pragma once

#include <sparselogit/baselines.hpp>
#include <sparselogit/model.hpp>
#include <sparselogit/solver.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sparselogit {

// Rows i.i.d. N(0, (1 - kappa) I + kappa 11'), built as
// x_i = sqrt(1 - kappa) z_i + sqrt(kappa) g_i 1.
Matrix generate_design(std::size_t n, std::size_t p, double kappa, std::uint64_t seed);

struct SparseTruth {
    Coefficients beta_star;
    IndexSet support;
};

// s coordinates chosen uniformly without replacement, each set to +1 or -1
// with equal probability.
SparseTruth generate_truth(std::size_t p, std::size_t s, std::uint64_t seed);

// Bernoulli responses from the logistic model at beta_star.
Vector generate_response(const Matrix& X, const Coefficients& beta_star, std::uint64_t seed);

// n_lambda values equally spaced (linear) on [1e-4 * lambda_max, lambda_max]
// with lambda_max = 10 log(p) / n.
LambdaGrid default_grid(std::size_t n, std::size_t p, std::size_t n_lambda);

// Linearly spaced grid on [min_ratio * lambda_max, lambda_max].
LambdaGrid linear_grid(double lambda_max, double min_ratio, std::size_t n_lambda);

// |estimated \ truth| + |truth \ estimated| for sorted index sets.
std::size_t hamming_distance(const IndexSet& estimated, const IndexSet& truth);

struct SimulationConfig {
    std::size_t n = 200;
    std::size_t p = 200;
    double kappa = 0.0;
    std::size_t s = 5;
    std::size_t n_lambda = 500;
    std::size_t n_reps = 200;
    std::vector<Method> methods = {Method::Testing, Method::BIC, Method::CV, Method::AIC};
    double constant_c = kDefaultConstantC;
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    SolverOptions solver;
};

// Throws ParameterError when the config breaks its invariants.
void validate(const SimulationConfig& config);

struct ReplicationRecord {
    std::size_t rep = 0;
    Method method = Method::Testing;
    bool ok = false;
    double lambda = 0.0;
    std::size_t hamming = 0;
    std::size_t model_size = 0;
    std::optional<double> seconds;
    std::string failure;
};

struct MethodSummary {
    Method method = Method::Testing;
    std::size_t replications = 0;  // successful runs
    std::size_t failures = 0;
    MeanSd hamming;
    MeanSd model_size;
    // Filled only in timing mode.
    std::optional<MeanSd> seconds;
    std::optional<double> median_seconds;
};

struct ExperimentSummary {
    SimulationConfig config;
    bool timing_mode = false;
    std::vector<MethodSummary> methods;
    std::vector<ReplicationRecord> records;  // ordered by (rep, method)
};

struct ExperimentRun {
    unsigned threads = 1;
    // Sequential execution with per-method wall-clock timing.
    bool timing_mode = false;
};

/// Monte-Carlo comparison of calibration methods on simulated data.
///
/// Replication r draws (X, beta*, y) from streams derived from (seed, r), so
/// adding replications leaves earlier ones unchanged and the selection
/// results do not depend on the thread count. A method that throws on a
/// replication is recorded as a failure and excluded from its summary.
ExperimentSummary run_experiment(const SimulationConfig& config, const ExperimentRun& run = {});

}  // namespace sparselogit
