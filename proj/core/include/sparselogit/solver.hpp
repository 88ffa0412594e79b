#pragma once

#include <sparselogit/model.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace sparselogit {

/// Tuning-parameter sequence, strictly increasing and strictly positive.
class LambdaGrid {
public:
    // Sorts the values ascending. Throws ContractViolation on an empty input,
    // a non-positive or non-finite value, or a duplicate.
    explicit LambdaGrid(std::vector<double> values);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    double front() const { return values_.front(); }
    double back() const { return values_.back(); }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::vector<double> values_;
};

struct SolverOptions {
    // Sup-norm tolerance on the KKT residual.
    double tol = 1e-7;
    // Coordinate sweeps allowed per lambda (full and active-set sweeps both count).
    int max_iter = 10'000;
    // Per-coordinate penalty multipliers; empty means 1 for every coordinate.
    // A zero entry leaves that coordinate unpenalized (used for an intercept column).
    std::vector<double> penalty_factor;
};

// Floor applied to the IRLS weights p(1-p).
inline constexpr double kIrlsWeightFloor = 1e-5;
inline constexpr int kMaxStepHalvings = 30;

struct PathPoint {
    double lambda = 0.0;
    Coefficients beta;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct RegularizationPath {
    LambdaGrid grid;
    std::vector<PathPoint> points;  // points[k] belongs to grid[k]
};

// L(beta) + lambda * sum_j pf_j |beta_j|
double penalized_objective(const Dataset& data, const Coefficients& beta, double lambda,
                           std::span<const double> penalty_factor = {});

/// Sup-norm violation of the subgradient optimality conditions at beta.
///
/// For beta_j != 0 the violation is |g_j + lambda sign(beta_j)|, for beta_j == 0
/// it is max(0, |g_j| - lambda), with g the gradient of L. Zero iff beta
/// minimizes the penalized objective.
double kkt_residual(const Dataset& data, const Coefficients& beta, double lambda,
                    std::span<const double> penalty_factor = {});

// Same, from a precomputed gradient.
double kkt_residual_from_gradient(const Vector& grad, const Coefficients& beta, double lambda,
                                  std::span<const double> penalty_factor = {});

// ||X'(y - 1/2)||_inf / n: the smallest lambda at which beta = 0 is optimal.
double lambda_zero_threshold(const Dataset& data);

/// Minimizes L(beta) + lambda ||beta||_1 starting from `init`.
///
/// Proximal Newton: each outer step builds the IRLS quadratic model of L at
/// the current iterate and solves the penalized weighted least-squares
/// subproblem by cyclic coordinate descent with an active-set schedule. The
/// step is halved while it increases the penalized objective.
///
/// Exhausting max_iter yields converged = false and the last iterate; it is
/// not an error. A non-finite iterate throws NumericError.
PathPoint fit_single(const Dataset& data, double lambda, const Coefficients& init,
                     const SolverOptions& options = {});

/// Walks a grid from the largest lambda down, warm-starting each fit from the
/// previous solution. fit_path and the early-stopping calibration share this
/// so that both see bit-identical estimates.
class DescendingPathFitter {
public:
    DescendingPathFitter(const Dataset& data, const LambdaGrid& grid, SolverOptions options = {});

    bool done() const noexcept { return remaining_ == 0; }
    // Grid index that the next call to fit_next() will fit.
    std::size_t next_index() const noexcept { return remaining_ - 1; }
    const PathPoint& fit_next();

    // Fitted points in fitting (descending lambda) order.
    const std::vector<PathPoint>& fitted() const noexcept { return fitted_; }

private:
    const Dataset& data_;
    const LambdaGrid& grid_;
    SolverOptions options_;
    std::size_t remaining_;
    Coefficients warm_;
    std::vector<PathPoint> fitted_;
};

/// Full regularization path, aligned ascending with `grid`.
///
/// A NumericError raised at some lambda is rethrown with that lambda in the
/// message.
RegularizationPath fit_path(const Dataset& data, const LambdaGrid& grid,
                            const SolverOptions& options = {});

}  // namespace sparselogit
