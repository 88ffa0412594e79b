#include <sparselogit/calibration.hpp>

#include <sparselogit/diagnostics.hpp>
#include <sparselogit/errors.hpp>
#include <sparselogit/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace sparselogit {

namespace {

// A fitted point together with its nonzero coordinates; the sup-norm of a
// difference only needs the union of the two supports.
struct SparsePoint {
    const PathPoint* point;
    const IndexSet* nonzero;
};

double sup_distance(const SparsePoint& a, const SparsePoint& b, const IndexSet& tested) {
    const Coefficients& x = a.point->beta;
    const Coefficients& y = b.point->beta;
    double worst = 0.0;
    auto visit = [&](std::size_t j) {
        const auto jj = static_cast<Eigen::Index>(j);
        worst = std::max(worst, std::abs(x[jj] - y[jj]));
    };
    if (!tested.empty()) {
        for (std::size_t j : tested) visit(j);
        return worst;
    }
    for (std::size_t j : *a.nonzero) visit(j);
    for (std::size_t j : *b.nonzero) visit(j);
    return worst;
}

// Largest normalized distance between `candidate` and the points at larger
// lambda, minus C. The pair of a point with itself contributes -C.
double pair_statistic(const SparsePoint& candidate, std::span<const SparsePoint> larger,
                      double constant_c, const IndexSet& tested) {
    double worst = -constant_c;
    for (const SparsePoint& other : larger) {
        const double stat = sup_distance(other, candidate, tested) /
                                (other.point->lambda + candidate.point->lambda) -
                            constant_c;
        worst = std::max(worst, stat);
    }
    return worst;
}

std::string describe_lambda(double lambda) {
    std::ostringstream out;
    out.precision(17);
    out << lambda;
    return out.str();
}

void require_converged(const PathPoint& point) {
    if (!point.converged) {
        throw CalibrationError("solver did not converge at lambda " + describe_lambda(point.lambda) +
                               " (KKT residual " + describe_lambda(point.kkt_residual) + ")");
    }
}

void check_constant(double constant_c) {
    if (!(constant_c >= 0.0) || !std::isfinite(constant_c)) {
        throw ContractViolation("testing constant C must be finite and non-negative");
    }
}

}  // namespace

TestingSelection select_lambda_testing(const RegularizationPath& path, double constant_c,
                                       const IndexSet& tested) {
    check_constant(constant_c);
    const std::size_t count = path.points.size();
    if (count == 0 || count != path.grid.size()) {
        throw ContractViolation("path is empty or not aligned with its grid");
    }

    TestingSelection selection;
    selection.trace.reserve(count);
    std::vector<IndexSet> supports;
    std::vector<SparsePoint> views;
    supports.reserve(count);
    views.reserve(count);
    for (const PathPoint& point : path.points) supports.push_back(support_of(point.beta));
    for (std::size_t k = 0; k < count; ++k) views.push_back(SparsePoint{&path.points[k], &supports[k]});

    double running = -constant_c;
    std::size_t selected = count - 1;
    for (std::size_t k = count; k-- > 0;) {
        const PathPoint& point = path.points[k];
        const auto above = std::span<const SparsePoint>(views.data() + k + 1, count - k - 1);
        const double stat = pair_statistic(views[k], above, constant_c, tested);
        running = std::max(running, stat);
        selection.trace.push_back({k, point.lambda, stat, running <= 0.0});
        if (running <= 0.0) {
            selected = k;
        }
    }

    // Points from the first failing index upward decide the selection.
    const std::size_t frontier = selected == 0 ? 0 : selected - 1;
    for (std::size_t k = count; k-- > frontier;) {
        require_converged(path.points[k]);
    }

    selection.lambda_index = selected;
    selection.lambda_hat = path.points[selected].lambda;
    return selection;
}

IndexSet thresholded_support(const Coefficients& beta_hat, double constant_c, double lambda_hat,
                             const IndexSet& tested) {
    if (!(lambda_hat > 0.0)) {
        throw ContractViolation("lambda_hat must be positive");
    }
    const double threshold = 3.0 * constant_c * lambda_hat;
    IndexSet support;
    auto consider = [&](std::size_t j) {
        const double v = beta_hat[static_cast<Eigen::Index>(j)];
        if (v != 0.0 && std::abs(v) >= threshold) support.push_back(j);
    };
    if (tested.empty()) {
        for (std::size_t j = 0; j < static_cast<std::size_t>(beta_hat.size()); ++j) consider(j);
    } else {
        for (std::size_t j : tested) consider(j);
    }
    return support;
}

CalibrationResult calibrate(const Dataset& data, const LambdaGrid& grid, double constant_c,
                            const SolverOptions& options, const IndexSet& tested) {
    check_constant(constant_c);
    DescendingPathFitter fitter(data, grid, options);

    CalibrationResult result;
    result.constant_c = constant_c;
    std::size_t selected = grid.size() - 1;
    std::vector<IndexSet> supports;
    while (!fitter.done()) {
        const std::size_t k = fitter.next_index();
        const PathPoint& point = fitter.fit_next();
        require_converged(point);
        supports.push_back(support_of(point.beta));
        // fit_next() may reallocate, so views are rebuilt against the current storage.
        const auto& fitted = fitter.fitted();
        std::vector<SparsePoint> views;
        views.reserve(fitted.size());
        for (std::size_t i = 0; i < fitted.size(); ++i) {
            views.push_back(SparsePoint{&fitted[i], &supports[i]});
        }
        // Earlier pairs all passed, so only pairs involving the new point matter.
        const auto larger = std::span<const SparsePoint>(views.data(), views.size() - 1);
        const double stat = pair_statistic(views.back(), larger, constant_c, tested);
        const bool passed = stat <= 0.0;
        result.test_trace.push_back({k, point.lambda, stat, passed});
        if (!passed) {
            break;
        }
        selected = k;
    }

    const auto& fitted = fitter.fitted();
    result.fitted_points = fitted.size();
    result.lambda_index = selected;
    result.lambda_hat = grid[selected];
    result.beta_hat = fitted[grid.size() - 1 - selected].beta;
    result.support_hat = thresholded_support(result.beta_hat, constant_c, result.lambda_hat, tested);
    return result;
}

namespace validation {

OracleLambda estimate_oracle_lambda(const Matrix& X, const OracleRequest& request,
                                    const LambdaGrid& grid, std::uint64_t seed, unsigned threads) {
    if (!(request.delta > 0.0 && request.delta < 1.0)) {
        throw ContractViolation("delta must lie in (0, 1)");
    }
    if (request.n_draws < 1) {
        throw ContractViolation("at least one draw is required");
    }
    if (!(request.gamma > 0.0 && request.gamma <= 1.0)) {
        throw ContractViolation("gamma must lie in (0, 1]");
    }
    if (request.truth.size() != X.cols()) {
        throw ContractViolation("truth length does not match predictor count");
    }

    const Vector eta = X * request.truth;
    const Vector prob = eta.unaryExpr([](double t) { return sigmoid(t); });

    std::vector<double> thresholds(request.n_draws);
    parallel_for(request.n_draws, threads, [&](std::size_t d) {
        Rng rng = derive_rng(seed, {static_cast<std::uint64_t>(d)});
        const Vector epsilon = sample_response(prob, rng) - prob;
        thresholds[d] = event_threshold(X, epsilon, request.gamma);
    });
    std::sort(thresholds.begin(), thresholds.end());

    OracleLambda oracle;
    oracle.coverage.reserve(grid.size());
    const double draws = static_cast<double>(request.n_draws);
    bool found = false;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto held = static_cast<double>(
            std::upper_bound(thresholds.begin(), thresholds.end(), grid[k]) - thresholds.begin());
        const double coverage = held / draws;
        oracle.coverage.push_back(coverage);
        if (!found && coverage >= 1.0 - request.delta) {
            found = true;
            oracle.lambda_index = k;
            oracle.lambda_star = grid[k];
        }
    }
    if (!found) {
        throw CalibrationError("grid too low: no lambda reaches coverage " +
                               describe_lambda(1.0 - request.delta) + " (largest lambda covers " +
                               describe_lambda(oracle.coverage.back()) + ")");
    }
    return oracle;
}

}  // namespace validation

}  // namespace sparselogit
