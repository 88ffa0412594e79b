#include <sparselogit/simulation.hpp>

#include <sparselogit/errors.hpp>
#include <sparselogit/parallel.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace sparselogit {

namespace {

// Stream ids inside one replication.
enum Stream : std::uint64_t { kDesign = 1, kTruth = 2, kResponse = 3, kFolds = 4 };

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

}  // namespace

Matrix generate_design(std::size_t n, std::size_t p, double kappa, std::uint64_t seed) {
    if (!(kappa >= 0.0 && kappa < 1.0)) {
        throw ParameterError("kappa must lie in [0, 1)");
    }
    Rng rng = derive_rng(seed, {});
    std::normal_distribution<double> normal(0.0, 1.0);
    const double own = std::sqrt(1.0 - kappa);
    const double shared = std::sqrt(kappa);
    Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double g = normal(rng);
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            X(i, j) = own * normal(rng) + shared * g;
        }
    }
    return X;
}

SparseTruth generate_truth(std::size_t p, std::size_t s, std::uint64_t seed) {
    if (s > p) {
        throw ParameterError("sparsity s exceeds the number of predictors");
    }
    Rng rng = derive_rng(seed, {});
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Partial Fisher-Yates: the first s entries are a uniform s-subset.
    for (std::size_t k = 0; k < s; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, p - 1);
        std::swap(order[k], order[pick(rng)]);
    }
    SparseTruth truth;
    truth.support.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s));
    std::sort(truth.support.begin(), truth.support.end());
    truth.beta_star = Coefficients::Zero(static_cast<Eigen::Index>(p));
    std::bernoulli_distribution coin(0.5);
    for (std::size_t j : truth.support) {
        truth.beta_star[static_cast<Eigen::Index>(j)] = coin(rng) ? 1.0 : -1.0;
    }
    return truth;
}

Vector generate_response(const Matrix& X, const Coefficients& beta_star, std::uint64_t seed) {
    if (beta_star.size() != X.cols()) {
        throw ContractViolation("coefficient length does not match predictor count");
    }
    const Vector eta = X * beta_star;
    Rng rng = derive_rng(seed, {});
    return sample_response(eta.unaryExpr([](double t) { return sigmoid(t); }), rng);
}

LambdaGrid linear_grid(double lambda_max, double min_ratio, std::size_t n_lambda) {
    if (n_lambda < 1) {
        throw ParameterError("grid needs at least one value");
    }
    if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
        throw ParameterError("largest lambda must be positive and finite");
    }
    if (!(min_ratio > 0.0 && min_ratio < 1.0)) {
        throw ParameterError("lambda min ratio must lie in (0, 1)");
    }
    if (n_lambda == 1) {
        return LambdaGrid({lambda_max});
    }
    const double lambda_min = min_ratio * lambda_max;
    const double step = (lambda_max - lambda_min) / static_cast<double>(n_lambda - 1);
    std::vector<double> values(n_lambda);
    for (std::size_t k = 0; k + 1 < n_lambda; ++k) {
        values[k] = lambda_min + static_cast<double>(k) * step;
    }
    values.back() = lambda_max;
    return LambdaGrid(std::move(values));
}

LambdaGrid default_grid(std::size_t n, std::size_t p, std::size_t n_lambda) {
    if (n < 1 || p < 2) {
        throw ParameterError("default grid needs n >= 1 and p >= 2 (log p must be positive)");
    }
    const double lambda_max = 10.0 * std::log(static_cast<double>(p)) / static_cast<double>(n);
    return linear_grid(lambda_max, 1e-4, n_lambda);
}

std::size_t hamming_distance(const IndexSet& estimated, const IndexSet& truth) {
    std::vector<std::size_t> diff;
    std::set_symmetric_difference(estimated.begin(), estimated.end(), truth.begin(), truth.end(),
                                  std::back_inserter(diff));
    return diff.size();
}

void validate(const SimulationConfig& config) {
    if (config.n < 1 || config.p < 2) throw ParameterError("need n >= 1 and p >= 2");
    if (!(config.kappa >= 0.0 && config.kappa < 1.0)) throw ParameterError("kappa must lie in [0, 1)");
    if (config.s > config.p) throw ParameterError("s must not exceed p");
    if (config.n_lambda < 1) throw ParameterError("n_lambda must be at least 1");
    if (config.n_reps < 1) throw ParameterError("n_reps must be at least 1");
    if (config.methods.empty()) throw ParameterError("at least one method is required");
    if (!(config.constant_c >= 0.0)) throw ParameterError("C must be non-negative");
    const bool uses_cv = std::find(config.methods.begin(), config.methods.end(), Method::CV) !=
                         config.methods.end();
    if (uses_cv && (config.folds < 2 || config.folds > config.n)) {
        throw ParameterError("folds must satisfy 2 <= k <= n");
    }
}

ExperimentSummary run_experiment(const SimulationConfig& config, const ExperimentRun& run) {
    validate(config);
    const LambdaGrid grid = default_grid(config.n, config.p, config.n_lambda);
    const std::size_t n_methods = config.methods.size();
    const bool uses_ic = std::any_of(config.methods.begin(), config.methods.end(), [](Method m) {
        return m == Method::AIC || m == Method::BIC;
    });

    std::vector<ReplicationRecord> records(config.n_reps * n_methods);
    auto replicate = [&](std::size_t r) {
        const auto rep = static_cast<std::uint64_t>(r);
        const Matrix X = generate_design(config.n, config.p, config.kappa,
                                         derive_seed(config.seed, {rep, kDesign}));
        const SparseTruth truth = generate_truth(config.p, config.s,
                                                 derive_seed(config.seed, {rep, kTruth}));
        Vector y = generate_response(X, truth.beta_star, derive_seed(config.seed, {rep, kResponse}));
        const Dataset data(X, std::move(y));

        // Outside timing mode AIC and BIC share one full path.
        std::optional<RegularizationPath> shared_path;
        std::string shared_failure;
        if (uses_ic && !run.timing_mode) {
            try {
                shared_path = fit_path(data, grid, config.solver);
            } catch (const std::runtime_error& e) {
                shared_failure = e.what();
            }
        }

        for (std::size_t m = 0; m < n_methods; ++m) {
            ReplicationRecord& rec = records[r * n_methods + m];
            rec.rep = r;
            rec.method = config.methods[m];
            const auto start = std::chrono::steady_clock::now();
            try {
                SelectionOutcome outcome;
                if (rec.method == Method::AIC || rec.method == Method::BIC) {
                    if (run.timing_mode) {
                        outcome = selection_from_path(data, fit_path(data, grid, config.solver), rec.method);
                    } else if (shared_path) {
                        outcome = selection_from_path(data, *shared_path, rec.method);
                    } else {
                        throw NumericError(shared_failure);
                    }
                } else {
                    SelectorConfig selector;
                    selector.method = rec.method;
                    selector.constant_c = config.constant_c;
                    selector.solver = config.solver;
                    selector.cv.folds = config.folds;
                    selector.cv.seed = derive_seed(config.seed, {rep, kFolds});
                    selector.cv.threads = 1;
                    outcome = run_selection(data, grid, selector);
                }
                if (run.timing_mode) {
                    rec.seconds = seconds_since(start);
                }
                rec.ok = true;
                rec.lambda = outcome.lambda;
                rec.model_size = outcome.support.size();
                rec.hamming = hamming_distance(outcome.support, truth.support);
            } catch (const std::runtime_error& e) {
                rec.ok = false;
                rec.failure = e.what();
            }
        }
    };

    if (run.timing_mode) {
        for (std::size_t r = 0; r < config.n_reps; ++r) replicate(r);
    } else {
        parallel_for(config.n_reps, run.threads, replicate);
    }

    ExperimentSummary summary;
    summary.config = config;
    summary.timing_mode = run.timing_mode;
    for (std::size_t m = 0; m < n_methods; ++m) {
        MethodSummary ms;
        ms.method = config.methods[m];
        std::vector<double> hamming;
        std::vector<double> sizes;
        std::vector<double> seconds;
        for (std::size_t r = 0; r < config.n_reps; ++r) {
            const ReplicationRecord& rec = records[r * n_methods + m];
            if (!rec.ok) {
                ++ms.failures;
                continue;
            }
            hamming.push_back(static_cast<double>(rec.hamming));
            sizes.push_back(static_cast<double>(rec.model_size));
            if (rec.seconds) seconds.push_back(*rec.seconds);
        }
        ms.replications = hamming.size();
        ms.hamming = mean_sd(hamming);
        ms.model_size = mean_sd(sizes);
        if (run.timing_mode && !seconds.empty()) {
            ms.seconds = mean_sd(seconds);
            ms.median_seconds = median(seconds);
        }
        summary.methods.push_back(ms);
    }
    summary.records = std::move(records);
    return summary;
}

}  // namespace sparselogit
