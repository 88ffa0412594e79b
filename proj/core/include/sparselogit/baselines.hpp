#pragma once

#include <sparselogit/calibration.hpp>
#include <sparselogit/model.hpp>
#include <sparselogit/solver.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sparselogit {

enum class Method { Testing, BIC, CV, AIC };

std::string_view method_name(Method method);
// Accepts "testing", "bic", "cv", "aic" (case-insensitive).
std::optional<Method> parse_method(std::string_view name);

enum class CriterionKind { AIC, BIC };

enum class CvLoss { Deviance, Misclassification };

/// Output of any calibration method.
///
/// For the standard methods support == supp(beta); the testing method reports
/// its thresholded support instead. score_trace holds one criterion value per
/// grid point (ascending lambda) and is empty for the testing method.
struct SelectionOutcome {
    Method method = Method::Testing;
    double lambda = 0.0;
    std::size_t lambda_index = 0;
    Coefficients beta;
    IndexSet support;
    std::vector<double> score_trace;
    std::vector<std::string> warnings;
};

/// AIC / BIC along a fitted path: 2n L(b_lambda) + penalty * df with
/// df = |supp(b_lambda)|, penalty 2 (AIC) or log n (BIC). Ties go to the larger
/// lambda. Non-converged points are skipped with a warning; a path with no
/// converged point throws CalibrationError.
SelectionOutcome select_information_criterion(const Dataset& data, const RegularizationPath& path,
                                              CriterionKind kind);

struct CvOptions {
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    CvLoss loss = CvLoss::Deviance;
    unsigned threads = 1;
};

// Fold id per sample from a seeded permutation; fold sizes differ by at most one.
std::vector<std::size_t> cv_fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed);

// Held-out loss of beta on `data`: mean binomial deviance
// 2 sum_i (log(1 + exp(x_i'beta)) - y_i x_i'beta) / n, or the 0/1 error rate.
double held_out_loss(const Dataset& data, const Coefficients& beta, CvLoss loss);

/// k-fold cross-validation over the grid. Each fold fits a full path on its
/// complement; the mean held-out loss across folds is minimized, ties to the
/// larger lambda. The returned beta comes from a path fitted on all of `data`.
SelectionOutcome select_cross_validation(const Dataset& data, const LambdaGrid& grid,
                                         const CvOptions& options,
                                         const SolverOptions& solver = {});

// Ridge on the Newton system, relative to the largest Hessian diagonal entry.
inline constexpr double kRefitRidge = 1e-8;
inline constexpr double kSeparationSuspectNorm = 30.0;

struct RefitResult {
    Coefficients beta;  // zero off the support
    bool separation_suspect = false;
    bool converged = false;
    int iterations = 0;
};

/// Unpenalized maximum likelihood restricted to `support` (Newton with step
/// halving, 1e-8 ridge on the Newton system). An empty support gives the
/// zero vector.
RefitResult refit_unpenalized(const Dataset& data, const IndexSet& support);

struct SelectorConfig {
    Method method = Method::Testing;
    double constant_c = kDefaultConstantC;
    CvOptions cv;
    SolverOptions solver;
};

// Runs one calibration method end to end on `data`.
SelectionOutcome run_selection(const Dataset& data, const LambdaGrid& grid,
                               const SelectorConfig& config);

// Same, reusing an already fitted full path for AIC/BIC.
SelectionOutcome selection_from_path(const Dataset& data, const RegularizationPath& path,
                                     Method method);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation, 0 for fewer than two values
};

MeanSd mean_sd(std::span<const double> values);

struct EvaluationReport {
    Method method = Method::Testing;
    std::size_t runs = 0;    // held-out samples that completed
    std::size_t failed = 0;  // held-out samples whose selection threw
    MeanSd model_size;
    MeanSd loocv_error;
    MeanSd loocv_refit_error;
    std::vector<std::string> failures;
};

/// Leave-one-out evaluation of a calibration method. For every sample i the
/// method runs on the other n - 1 samples; y_i is then predicted as 1 when the
/// fitted probability is >= 1/2, once with the selected estimate restricted to
/// its support and once after an unpenalized refit on that support.
///
/// CV inside fold i uses a seed derived from (config.cv.seed, i), so the report
/// does not depend on `threads`.
EvaluationReport loocv_evaluate(const Dataset& data, const LambdaGrid& grid,
                                const SelectorConfig& config, unsigned threads = 1);

}  // namespace sparselogit
