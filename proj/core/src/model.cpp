#include <sparselogit/model.hpp>

#include <sparselogit/errors.hpp>

#include <algorithm>
#include <string>

namespace sparselogit {

Dataset::Dataset(Matrix X, Vector y) : X_(std::move(X)), y_(std::move(y)) {
    if (X_.rows() < 1 || X_.cols() < 1) {
        throw ContractViolation("design matrix must have at least one row and one column");
    }
    if (y_.size() != X_.rows()) {
        throw ContractViolation("response length " + std::to_string(y_.size()) +
                                " does not match " + std::to_string(X_.rows()) + " rows");
    }
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
        if (y_[i] != 0.0 && y_[i] != 1.0) {
            throw DataError("response entry " + std::to_string(i) + " is not 0 or 1");
        }
    }
    for (Eigen::Index j = 0; j < X_.cols(); ++j) {
        for (Eigen::Index i = 0; i < X_.rows(); ++i) {
            const double v = X_(i, j);
            if (!std::isfinite(v)) {
                throw DataError("non-finite design entry at row " + std::to_string(i) +
                                ", column " + std::to_string(j));
            }
            max_abs_ = std::max(max_abs_, std::abs(v));
        }
    }
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
    Matrix X(static_cast<Eigen::Index>(rows.size()), X_.cols());
    Vector y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        X.row(static_cast<Eigen::Index>(r)) = X_.row(rows[r]);
        y[static_cast<Eigen::Index>(r)] = y_[rows[r]];
    }
    return Dataset(std::move(X), std::move(y));
}

IndexSet support_of(const Coefficients& beta) {
    IndexSet support;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (beta[j] != 0.0) support.push_back(static_cast<std::size_t>(j));
    }
    return support;
}

void check_dimensions(const Dataset& data, const Coefficients& beta) {
    if (beta.size() != data.p()) {
        throw ContractViolation("coefficient length " + std::to_string(beta.size()) +
                                " does not match " + std::to_string(data.p()) + " predictors");
    }
}

Vector predicted_probabilities(const Dataset& data, const Coefficients& beta) {
    check_dimensions(data, beta);
    const Vector eta = data.X() * beta;
    return eta.unaryExpr([](double t) { return sigmoid(t); });
}

double negative_log_likelihood_from_linear(const Vector& eta, const Vector& y) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double term = log1p_exp(eta[i]) - y[i] * eta[i];
        if (!std::isfinite(term)) {
            throw NumericError("non-finite likelihood term", static_cast<std::size_t>(i));
        }
        total += term;
    }
    return total / static_cast<double>(eta.size());
}

double negative_log_likelihood(const Dataset& data, const Coefficients& beta) {
    check_dimensions(data, beta);
    return negative_log_likelihood_from_linear(data.X() * beta, data.y());
}

Vector gradient(const Dataset& data, const Coefficients& beta) {
    const Vector prob = predicted_probabilities(data, beta);
    return data.X().transpose() * (prob - data.y()) / static_cast<double>(data.n());
}

Vector sample_response(const Vector& probabilities, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector y(probabilities.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        y[i] = unit(rng) < probabilities[i] ? 1.0 : 0.0;
    }
    return y;
}

Vector residuals(const Dataset& data, const Coefficients& beta_star) {
    return data.y() - predicted_probabilities(data, beta_star);
}

}  // namespace sparselogit
