#include <sparselogit/baselines.hpp>

#include <sparselogit/errors.hpp>
#include <sparselogit/parallel.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace sparselogit {

namespace {

std::string lambda_text(double lambda) {
    std::ostringstream out;
    out.precision(17);
    out << lambda;
    return out.str();
}

Matrix support_columns(const Matrix& X, const IndexSet& support) {
    Matrix out(X.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = X.col(static_cast<Eigen::Index>(support[k]));
    }
    return out;
}

Coefficients restrict_to(const Coefficients& beta, const IndexSet& support) {
    Coefficients out = Coefficients::Zero(beta.size());
    for (std::size_t j : support) {
        const auto jj = static_cast<Eigen::Index>(j);
        out[jj] = beta[jj];
    }
    return out;
}

}  // namespace

std::string_view method_name(Method method) {
    switch (method) {
        case Method::Testing: return "testing";
        case Method::BIC: return "bic";
        case Method::CV: return "cv";
        case Method::AIC: return "aic";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (Method m : {Method::Testing, Method::BIC, Method::CV, Method::AIC}) {
        if (lower == method_name(m)) return m;
    }
    return std::nullopt;
}

SelectionOutcome select_information_criterion(const Dataset& data, const RegularizationPath& path,
                                              CriterionKind kind) {
    const double n = static_cast<double>(data.n());
    const double per_df = kind == CriterionKind::AIC ? 2.0 : std::log(n);

    SelectionOutcome outcome;
    outcome.method = kind == CriterionKind::AIC ? Method::AIC : Method::BIC;
    outcome.score_trace.assign(path.points.size(), std::numeric_limits<double>::quiet_NaN());

    std::optional<std::size_t> best;
    double best_score = 0.0;
    for (std::size_t k = path.points.size(); k-- > 0;) {
        const PathPoint& point = path.points[k];
        if (!point.converged) {
            outcome.warnings.push_back("skipped non-converged lambda " + lambda_text(point.lambda));
            continue;
        }
        const double df = static_cast<double>(support_of(point.beta).size());
        const double score = 2.0 * n * negative_log_likelihood(data, point.beta) + per_df * df;
        outcome.score_trace[k] = score;
        // Strict comparison while descending keeps the larger lambda on ties.
        if (!best || score < best_score) {
            best = k;
            best_score = score;
        }
    }
    if (!best) {
        throw CalibrationError("no converged point on the path");
    }
    outcome.lambda_index = *best;
    outcome.lambda = path.points[*best].lambda;
    outcome.beta = path.points[*best].beta;
    outcome.support = support_of(outcome.beta);
    return outcome;
}

std::vector<std::size_t> cv_fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed) {
    if (folds < 2 || folds > n) {
        throw ParameterError("fold count must satisfy 2 <= k <= n");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = derive_rng(seed, {0x6366u});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> fold(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        fold[order[pos]] = pos % folds;
    }
    return fold;
}

double held_out_loss(const Dataset& data, const Coefficients& beta, CvLoss loss) {
    const Vector eta = data.X() * beta;
    const double count = static_cast<double>(data.n());
    if (loss == CvLoss::Deviance) {
        return 2.0 * negative_log_likelihood_from_linear(eta, data.y());
    }
    double errors = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double predicted = sigmoid(eta[i]) >= 0.5 ? 1.0 : 0.0;
        errors += predicted != data.y()[i] ? 1.0 : 0.0;
    }
    return errors / count;
}

SelectionOutcome select_cross_validation(const Dataset& data, const LambdaGrid& grid,
                                         const CvOptions& options, const SolverOptions& solver) {
    const auto n = static_cast<std::size_t>(data.n());
    const std::vector<std::size_t> fold_of = cv_fold_assignment(n, options.folds, options.seed);

    std::vector<std::vector<double>> fold_losses(options.folds);
    std::vector<std::vector<std::string>> fold_warnings(options.folds);
    parallel_for(options.folds, options.threads, [&](std::size_t f) {
        std::vector<Eigen::Index> train;
        std::vector<Eigen::Index> test;
        for (std::size_t i = 0; i < n; ++i) {
            (fold_of[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
        }
        const Dataset train_data = data.subset(train);
        const Dataset test_data = data.subset(test);
        const double positives = train_data.y().sum();
        if (positives == 0.0 || positives == static_cast<double>(train_data.n())) {
            fold_warnings[f].push_back("fold " + std::to_string(f) + " has a constant training response");
        }
        const RegularizationPath path = fit_path(train_data, grid, solver);
        auto& losses = fold_losses[f];
        losses.reserve(grid.size());
        for (const PathPoint& point : path.points) {
            if (!point.converged) {
                fold_warnings[f].push_back("fold " + std::to_string(f) + " did not converge at lambda " +
                                           lambda_text(point.lambda));
            }
            losses.push_back(held_out_loss(test_data, point.beta, options.loss));
        }
    });

    SelectionOutcome outcome;
    outcome.method = Method::CV;
    outcome.score_trace.assign(grid.size(), 0.0);
    for (std::size_t f = 0; f < options.folds; ++f) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            outcome.score_trace[k] += fold_losses[f][k];
        }
        outcome.warnings.insert(outcome.warnings.end(), fold_warnings[f].begin(), fold_warnings[f].end());
    }
    std::size_t best = grid.size() - 1;
    for (std::size_t k = grid.size(); k-- > 0;) {
        outcome.score_trace[k] /= static_cast<double>(options.folds);
        if (outcome.score_trace[k] < outcome.score_trace[best]) {
            best = k;
        }
    }

    const RegularizationPath full = fit_path(data, grid, solver);
    outcome.lambda_index = best;
    outcome.lambda = grid[best];
    outcome.beta = full.points[best].beta;
    outcome.support = support_of(outcome.beta);
    if (!full.points[best].converged) {
        outcome.warnings.push_back("full-data fit did not converge at the selected lambda");
    }
    return outcome;
}

RefitResult refit_unpenalized(const Dataset& data, const IndexSet& support) {
    RefitResult result;
    result.beta = Coefficients::Zero(data.p());
    if (support.empty()) {
        result.converged = true;
        return result;
    }
    for (std::size_t j : support) {
        if (j >= static_cast<std::size_t>(data.p())) {
            throw ContractViolation("support index out of range");
        }
    }

    constexpr int kMaxNewton = 100;
    constexpr double kGradientTol = 1e-10;
    constexpr double kStepTol = 1e-8;
    const Matrix XS = support_columns(data.X(), support);
    const Vector& y = data.y();
    const double n = static_cast<double>(data.n());
    const auto s = static_cast<Eigen::Index>(support.size());

    Vector b = Vector::Zero(s);
    Vector eta = Vector::Zero(data.n());
    double loss = negative_log_likelihood_from_linear(eta, y);
    for (int iter = 0; iter < kMaxNewton; ++iter) {
        const Vector prob = eta.unaryExpr([](double t) { return sigmoid(t); });
        const Vector grad = XS.transpose() * (prob - y) / n;
        result.iterations = iter;
        const Vector w = eta.unaryExpr([](double t) { return logistic_variance(t); });
        Matrix hessian = XS.transpose() * w.asDiagonal() * XS / n;
        // Ridge relative to the Hessian scale, so that it does not freeze the
        // iterates once the weights saturate.
        hessian.diagonal().array() += kRefitRidge * std::max(hessian.diagonal().maxCoeff(), 1e-300);
        const Vector step = hessian.ldlt().solve(grad);
        // Under separation the gradient decays geometrically while the Newton
        // step stays O(1), so both must be small.
        if (grad.lpNorm<Eigen::Infinity>() <= kGradientTol &&
            step.lpNorm<Eigen::Infinity>() <= kStepTol) {
            result.converged = true;
            break;
        }
        const Vector x_step = XS * step;

        bool accepted = false;
        double t = 1.0;
        for (int halving = 0; halving <= kMaxStepHalvings; ++halving, t *= 0.5) {
            const Vector trial_eta = eta - t * x_step;
            const double trial_loss = negative_log_likelihood_from_linear(trial_eta, y);
            if (trial_loss <= loss) {
                accepted = trial_loss < loss;
                b -= t * step;
                eta = trial_eta;
                loss = trial_loss;
                break;
            }
        }
        if (!accepted) {
            break;
        }
    }

    for (Eigen::Index k = 0; k < s; ++k) {
        result.beta[static_cast<Eigen::Index>(support[static_cast<std::size_t>(k)])] = b[k];
    }
    result.separation_suspect = b.lpNorm<Eigen::Infinity>() > kSeparationSuspectNorm;
    return result;
}

SelectionOutcome selection_from_path(const Dataset& data, const RegularizationPath& path,
                                     Method method) {
    switch (method) {
        case Method::AIC: return select_information_criterion(data, path, CriterionKind::AIC);
        case Method::BIC: return select_information_criterion(data, path, CriterionKind::BIC);
        default: break;
    }
    throw ContractViolation("only AIC and BIC select from a precomputed path");
}

SelectionOutcome run_selection(const Dataset& data, const LambdaGrid& grid,
                               const SelectorConfig& config) {
    switch (config.method) {
        case Method::Testing: {
            const CalibrationResult cal = calibrate(data, grid, config.constant_c, config.solver);
            SelectionOutcome outcome;
            outcome.method = Method::Testing;
            outcome.lambda = cal.lambda_hat;
            outcome.lambda_index = cal.lambda_index;
            outcome.beta = cal.beta_hat;
            outcome.support = cal.support_hat;
            return outcome;
        }
        case Method::AIC:
        case Method::BIC:
            return selection_from_path(data, fit_path(data, grid, config.solver), config.method);
        case Method::CV:
            return select_cross_validation(data, grid, config.cv, config.solver);
    }
    throw ContractViolation("unknown method");
}

MeanSd mean_sd(std::span<const double> values) {
    MeanSd out;
    if (values.empty()) return out;
    const double count = static_cast<double>(values.size());
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.sd = std::sqrt(ss / (count - 1.0));
    }
    return out;
}

EvaluationReport loocv_evaluate(const Dataset& data, const LambdaGrid& grid,
                                const SelectorConfig& config, unsigned threads) {
    const auto n = static_cast<std::size_t>(data.n());
    if (n < 2) {
        throw ContractViolation("leave-one-out evaluation needs at least two samples");
    }

    struct Run {
        bool ok = false;
        double size = 0.0;
        double error = 0.0;
        double refit_error = 0.0;
        std::string failure;
    };
    std::vector<Run> runs(n);
    parallel_for(n, threads, [&](std::size_t i) {
        std::vector<Eigen::Index> train;
        train.reserve(n - 1);
        for (std::size_t r = 0; r < n; ++r) {
            if (r != i) train.push_back(static_cast<Eigen::Index>(r));
        }
        const Dataset train_data = data.subset(train);
        SelectorConfig fold_config = config;
        fold_config.cv.seed = derive_seed(config.cv.seed, {static_cast<std::uint64_t>(i)});
        fold_config.cv.threads = 1;
        fold_config.cv.folds = std::min<std::size_t>(config.cv.folds, n - 1);

        Run& run = runs[i];
        try {
            const SelectionOutcome outcome = run_selection(train_data, grid, fold_config);
            const auto x = data.X().row(static_cast<Eigen::Index>(i));
            const double yi = data.y()[static_cast<Eigen::Index>(i)];
            auto misclassified = [&](const Coefficients& beta) {
                const double predicted = sigmoid(x.dot(beta)) >= 0.5 ? 1.0 : 0.0;
                return predicted != yi ? 1.0 : 0.0;
            };
            run.size = static_cast<double>(outcome.support.size());
            run.error = misclassified(restrict_to(outcome.beta, outcome.support));
            run.refit_error = misclassified(refit_unpenalized(train_data, outcome.support).beta);
            run.ok = true;
        } catch (const std::runtime_error& e) {
            run.failure = "sample " + std::to_string(i) + ": " + e.what();
        }
    });

    EvaluationReport report;
    report.method = config.method;
    std::vector<double> sizes;
    std::vector<double> errors;
    std::vector<double> refit_errors;
    for (const Run& run : runs) {
        if (!run.ok) {
            ++report.failed;
            report.failures.push_back(run.failure);
            continue;
        }
        sizes.push_back(run.size);
        errors.push_back(run.error);
        refit_errors.push_back(run.refit_error);
    }
    report.runs = sizes.size();
    report.model_size = mean_sd(sizes);
    report.loocv_error = mean_sd(errors);
    report.loocv_refit_error = mean_sd(refit_errors);
    return report;
}

}  // namespace sparselogit
