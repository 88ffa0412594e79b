#pragma once

#include <sparselogit/random.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

namespace sparselogit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Coefficient vector beta (length p). Both the true parameter and estimates
// live in this type.
using Coefficients = Eigen::VectorXd;

// Sorted, duplicate-free coordinate indices (0-based).
using IndexSet = std::vector<std::size_t>;

// Nonzero coordinates of beta.
IndexSet support_of(const Coefficients& beta);

/// Design matrix X (n x p, column-major) and binary response y.
///
/// Validated at construction: y entries are exactly 0 or 1, X is finite and
/// non-empty. Immutable afterwards, so a Dataset can be shared across threads.
class Dataset {
public:
    Dataset(Matrix X, Vector y);

    const Matrix& X() const noexcept { return X_; }
    const Vector& y() const noexcept { return y_; }
    Eigen::Index n() const noexcept { return X_.rows(); }
    Eigen::Index p() const noexcept { return X_.cols(); }

    // max_{i,j} |X_ij|
    double max_abs_entry() const noexcept { return max_abs_; }

    // Rows selected by `rows`, in the given order.
    Dataset subset(const std::vector<Eigen::Index>& rows) const;

private:
    Matrix X_;
    Vector y_;
    double max_abs_ = 0.0;
};

// log(1 + exp(t)) without overflow: t + log1p(exp(-t)) for t > 0.
inline double log1p_exp(double t) noexcept {
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

// exp(t) / (1 + exp(t)) evaluated on the non-overflowing branch.
inline double sigmoid(double t) noexcept {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// exp(t) / (1 + exp(t))^2 == sigmoid(t) * sigmoid(-t)
inline double logistic_variance(double t) noexcept {
    return sigmoid(t) * sigmoid(-t);
}

Vector predicted_probabilities(const Dataset& data, const Coefficients& beta);

// L(beta) = sum_i (log(1 + exp(x_i'beta)) - y_i x_i'beta) / n
double negative_log_likelihood(const Dataset& data, const Coefficients& beta);

// Same quantity from precomputed linear predictors eta = X beta.
double negative_log_likelihood_from_linear(const Vector& eta, const Vector& y);

// X'(p(beta) - y) / n
Vector gradient(const Dataset& data, const Coefficients& beta);

// y - p(beta)
Vector residuals(const Dataset& data, const Coefficients& beta_star);

// Independent Bernoulli draws: y_i = 1 with probability probabilities[i].
Vector sample_response(const Vector& probabilities, Rng& rng);

// Throws ContractViolation unless beta has length p.
void check_dimensions(const Dataset& data, const Coefficients& beta);

}  // namespace sparselogit
