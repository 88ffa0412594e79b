#include <sparselogit/solver.hpp>

#include <sparselogit/errors.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace sparselogit {

namespace {

double factor_at(std::span<const double> penalty_factor, Eigen::Index j) {
    return penalty_factor.empty() ? 1.0 : penalty_factor[static_cast<std::size_t>(j)];
}

void check_penalty_factor(const Dataset& data, std::span<const double> penalty_factor) {
    if (!penalty_factor.empty() && static_cast<Eigen::Index>(penalty_factor.size()) != data.p()) {
        throw ContractViolation("penalty factor length does not match predictor count");
    }
}

bool all_unit(std::span<const double> penalty_factor) {
    return std::all_of(penalty_factor.begin(), penalty_factor.end(),
                       [](double f) { return f == 1.0; });
}

double penalty(const Coefficients& beta, std::span<const double> penalty_factor) {
    if (penalty_factor.empty()) {
        return beta.lpNorm<1>();
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        total += penalty_factor[static_cast<std::size_t>(j)] * std::abs(beta[j]);
    }
    return total;
}

double soft_threshold(double u, double threshold) {
    if (u > threshold) return u - threshold;
    if (u < -threshold) return u + threshold;
    return 0.0;
}

void require_finite(const Coefficients& beta) {
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (!std::isfinite(beta[j])) {
            throw NumericError("non-finite coefficient", static_cast<std::size_t>(j));
        }
    }
}

// Working state of one proximal-Newton solve.
class ProximalNewton {
public:
    ProximalNewton(const Dataset& data, double lambda, const SolverOptions& options)
        : data_(data),
          X_(data.X()),
          y_(data.y()),
          lambda_(lambda),
          options_(options),
          pf_(options.penalty_factor),
          n_(static_cast<double>(data.n())),
          weights_(data.n()),
          work_resid_(data.n()),
          hess_diag_(data.p()) {}

    PathPoint run(const Coefficients& init) {
        beta_ = init;
        eta_ = X_ * beta_;
        objective_ = objective_at(eta_, beta_);
        double kkt = current_kkt();

        int sweeps = 0;
        while (kkt > options_.tol && sweeps < options_.max_iter) {
            const double inner_tol =
                std::max(0.1 * options_.tol, std::min(0.1, kkt) * kkt);
            Coefficients candidate = beta_;
            sweeps += solve_subproblem(candidate, inner_tol, options_.max_iter - sweeps);
            if (!line_search(candidate)) {
                break;
            }
            kkt = current_kkt();
        }

        PathPoint point;
        point.lambda = lambda_;
        point.beta = beta_;
        point.kkt_residual = kkt;
        point.iterations = sweeps;
        point.converged = kkt <= options_.tol;
        return point;
    }

private:
    double objective_at(const Vector& eta, const Coefficients& beta) const {
        return negative_log_likelihood_from_linear(eta, y_) + lambda_ * penalty(beta, pf_);
    }

    double current_kkt() const {
        Vector prob = eta_.unaryExpr([](double t) { return sigmoid(t); });
        const Vector grad = X_.transpose() * (prob - y_) / n_;
        return kkt_residual_from_gradient(grad, beta_, lambda_, pf_);
    }

    // Cyclic coordinate descent on the IRLS quadratic model around beta_.
    // Returns the number of sweeps used.
    int solve_subproblem(Coefficients& b, double inner_tol, int budget) {
        for (Eigen::Index i = 0; i < eta_.size(); ++i) {
            const double prob = sigmoid(eta_[i]);
            weights_[i] = std::max(prob * (1.0 - prob), kIrlsWeightFloor);
            // w (z - eta) with working response z = eta + (y - p) / w
            work_resid_[i] = y_[i] - prob;
        }
        for (Eigen::Index j = 0; j < X_.cols(); ++j) {
            hess_diag_[j] = X_.col(j).cwiseAbs2().dot(weights_) / n_;
        }

        int sweeps = 0;
        std::vector<Eigen::Index> active;
        while (sweeps < budget) {
            // Full sweep over every coordinate.
            const double full_change = sweep_all(b);
            ++sweeps;
            if (full_change <= inner_tol) {
                break;
            }
            active.clear();
            for (Eigen::Index j = 0; j < b.size(); ++j) {
                if (b[j] != 0.0) active.push_back(j);
            }
            // Iterate on the nonzero set until it settles, then re-verify with a full sweep.
            while (sweeps < budget) {
                const double change = sweep_active(b, active);
                ++sweeps;
                if (change <= inner_tol) break;
            }
        }
        return sweeps;
    }

    double update_coordinate(Coefficients& b, Eigen::Index j) {
        const double h = hess_diag_[j];
        if (h <= 0.0) {
            return 0.0;
        }
        const double old = b[j];
        const double u = h * old + X_.col(j).dot(work_resid_) / n_;
        const double updated = soft_threshold(u, lambda_ * factor_at(pf_, j)) / h;
        const double delta = updated - old;
        if (delta == 0.0) {
            return 0.0;
        }
        b[j] = updated;
        work_resid_.noalias() -= (delta * X_.col(j)).cwiseProduct(weights_);
        return h * std::abs(delta);
    }

    double sweep_all(Coefficients& b) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            max_change = std::max(max_change, update_coordinate(b, j));
        }
        return max_change;
    }

    double sweep_active(Coefficients& b, const std::vector<Eigen::Index>& active) {
        double max_change = 0.0;
        for (Eigen::Index j : active) {
            max_change = std::max(max_change, update_coordinate(b, j));
        }
        return max_change;
    }

    // Moves beta_ toward `candidate`, halving the step while the penalized
    // objective increases. Returns false when no step was accepted.
    bool line_search(const Coefficients& candidate) {
        require_finite(candidate);
        const Coefficients direction = candidate - beta_;
        Vector x_direction = Vector::Zero(eta_.size());
        for (Eigen::Index j = 0; j < direction.size(); ++j) {
            if (direction[j] != 0.0) {
                x_direction.noalias() += direction[j] * X_.col(j);
            }
        }
        if (direction.isZero(0.0)) {
            return false;
        }
        // Allowance for rounding in the objective evaluation itself.
        const double slack = 8.0 * std::numeric_limits<double>::epsilon() *
                             std::max(1.0, std::abs(objective_));
        double step = 1.0;
        for (int halving = 0; halving <= kMaxStepHalvings; ++halving) {
            Coefficients trial = step == 1.0 ? candidate : Coefficients(beta_ + step * direction);
            Vector trial_eta = eta_ + step * x_direction;
            const double trial_objective = objective_at(trial_eta, trial);
            if (trial_objective <= objective_ + slack) {
                beta_ = std::move(trial);
                eta_ = std::move(trial_eta);
                objective_ = std::min(objective_, trial_objective);
                return true;
            }
            step *= 0.5;
        }
        return false;
    }

    const Dataset& data_;
    const Matrix& X_;
    const Vector& y_;
    double lambda_;
    const SolverOptions& options_;
    std::span<const double> pf_;
    double n_;

    Coefficients beta_;
    Vector eta_;
    double objective_ = 0.0;

    Vector weights_;
    Vector work_resid_;
    Vector hess_diag_;
};

}  // namespace

LambdaGrid::LambdaGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw ContractViolation("lambda grid must not be empty");
    }
    for (double v : values_) {
        if (!(std::isfinite(v) && v > 0.0)) {
            throw ContractViolation("lambda grid values must be finite and positive");
        }
    }
    std::sort(values_.begin(), values_.end());
    if (std::adjacent_find(values_.begin(), values_.end()) != values_.end()) {
        throw ContractViolation("lambda grid contains duplicate values");
    }
}

double penalized_objective(const Dataset& data, const Coefficients& beta, double lambda,
                           std::span<const double> penalty_factor) {
    check_penalty_factor(data, penalty_factor);
    return negative_log_likelihood(data, beta) + lambda * penalty(beta, penalty_factor);
}

double kkt_residual_from_gradient(const Vector& grad, const Coefficients& beta, double lambda,
                                  std::span<const double> penalty_factor) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double bound = lambda * factor_at(penalty_factor, j);
        double violation;
        if (beta[j] > 0.0) {
            violation = std::abs(grad[j] + bound);
        } else if (beta[j] < 0.0) {
            violation = std::abs(grad[j] - bound);
        } else {
            violation = std::max(0.0, std::abs(grad[j]) - bound);
        }
        worst = std::max(worst, violation);
    }
    return worst;
}

double kkt_residual(const Dataset& data, const Coefficients& beta, double lambda,
                    std::span<const double> penalty_factor) {
    if (!(lambda > 0.0)) {
        throw ContractViolation("lambda must be positive");
    }
    check_penalty_factor(data, penalty_factor);
    return kkt_residual_from_gradient(gradient(data, beta), beta, lambda, penalty_factor);
}

double lambda_zero_threshold(const Dataset& data) {
    const Vector centered = data.y().array() - 0.5;
    return (data.X().transpose() * centered).lpNorm<Eigen::Infinity>() /
           static_cast<double>(data.n());
}

PathPoint fit_single(const Dataset& data, double lambda, const Coefficients& init,
                     const SolverOptions& options) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ContractViolation("lambda must be positive and finite");
    }
    if (!(options.tol > 0.0)) {
        throw ContractViolation("solver tolerance must be positive");
    }
    check_dimensions(data, init);
    check_penalty_factor(data, options.penalty_factor);
    require_finite(init);

    // beta = 0 satisfies the KKT conditions exactly above this threshold.
    if (all_unit(options.penalty_factor) && lambda >= lambda_zero_threshold(data)) {
        PathPoint point;
        point.lambda = lambda;
        point.beta = Coefficients::Zero(data.p());
        point.kkt_residual = 0.0;
        point.iterations = 0;
        point.converged = true;
        return point;
    }

    ProximalNewton solver(data, lambda, options);
    return solver.run(init);
}

DescendingPathFitter::DescendingPathFitter(const Dataset& data, const LambdaGrid& grid,
                                           SolverOptions options)
    : data_(data),
      grid_(grid),
      options_(std::move(options)),
      remaining_(grid.size()),
      warm_(Coefficients::Zero(data.p())) {
    fitted_.reserve(grid.size());
}

const PathPoint& DescendingPathFitter::fit_next() {
    if (done()) {
        throw ContractViolation("every grid value has already been fitted");
    }
    const double lambda = grid_[next_index()];
    try {
        fitted_.push_back(fit_single(data_, lambda, warm_, options_));
    } catch (const NumericError& e) {
        std::ostringstream msg;
        msg.precision(17);
        msg << e.what() << " at lambda " << lambda;
        throw NumericError(msg.str());
    }
    warm_ = fitted_.back().beta;
    --remaining_;
    return fitted_.back();
}

RegularizationPath fit_path(const Dataset& data, const LambdaGrid& grid,
                            const SolverOptions& options) {
    DescendingPathFitter fitter(data, grid, options);
    while (!fitter.done()) {
        fitter.fit_next();
    }
    std::vector<PathPoint> points(fitter.fitted().rbegin(), fitter.fitted().rend());
    return RegularizationPath{grid, std::move(points)};
}

}  // namespace sparselogit
