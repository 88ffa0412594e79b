#include <sparselogit/diagnostics.hpp>

#include <sparselogit/errors.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace sparselogit {

namespace {

double max_abs_row_sum(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    return M.cwiseAbs().rowwise().sum().maxCoeff();
}

Matrix columns(const Matrix& X, const IndexSet& idx) {
    Matrix out(X.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = X.col(static_cast<Eigen::Index>(idx[k]));
    }
    return out;
}

// Largest eigenvalue of X'X / n, via the smaller of the two Gram matrices.
double gram_top_eigenvalue(const Matrix& X) {
    const double n = static_cast<double>(X.rows());
    const Matrix gram = X.cols() <= X.rows() ? Matrix(X.transpose() * X) : Matrix(X * X.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram / n, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

}  // namespace

Vector hessian_weights(const Matrix& X, const Coefficients& beta_star) {
    if (beta_star.size() != X.cols()) {
        throw ContractViolation("coefficient length does not match predictor count");
    }
    const Vector eta = X * beta_star;
    return eta.unaryExpr([](double t) { return logistic_variance(t); });
}

AssumptionDiagnostics assumption_quantities(const Matrix& X, const Coefficients& beta_star,
                                            const IndexSet& support) {
    const Vector w = hessian_weights(X, beta_star);
    for (std::size_t j : support) {
        if (j >= static_cast<std::size_t>(X.cols())) {
            throw ContractViolation("support index out of range");
        }
    }

    AssumptionDiagnostics d;
    d.c_b = X.cwiseAbs().maxCoeff();
    d.c_max = gram_top_eigenvalue(X);
    d.support_size = support.size();
    if (support.empty()) {
        return d;
    }

    const double n = static_cast<double>(X.rows());
    const Matrix XS = columns(X, support);
    const Matrix weighted_S = w.asDiagonal() * XS;
    const Matrix H = XS.transpose() * weighted_S;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
    const Vector& evals = eig.eigenvalues();
    const double smallest = evals.minCoeff();
    const double largest = evals.maxCoeff();
    if (!(smallest > 1e-12 * std::max(largest, 1e-300))) {
        d.c_min = 0.0;
        return d;
    }
    d.c_min = smallest / n;

    const Matrix H_inv = eig.eigenvectors() * evals.cwiseInverse().asDiagonal() *
                         eig.eigenvectors().transpose();
    d.a = max_abs_row_sum(H_inv) * smallest;  // |||H^{-1}|||_2 = 1 / smallest

    IndexSet complement;
    std::vector<bool> in_support(static_cast<std::size_t>(X.cols()), false);
    for (std::size_t j : support) in_support[j] = true;
    for (std::size_t j = 0; j < in_support.size(); ++j) {
        if (!in_support[j]) complement.push_back(j);
    }
    // Rows indexed by the irrelevant predictors: X_{S^c}' W X_S H^{-1}.
    const Matrix cross = columns(X, complement).transpose() * weighted_S;
    d.gamma = 1.0 - max_abs_row_sum(cross * H_inv);

    d.assumptions_hold = *d.c_min > 0.0 && *d.gamma > 0.0;
    if (d.assumptions_hold) {
        const double g = *d.gamma;
        d.lambda_cap = g * (*d.c_min) * (*d.c_min) /
                       (100.0 * d.c_b * (2.0 - g) * static_cast<double>(support.size()) * d.c_max);
    }
    return d;
}

double event_threshold(const Matrix& X, const Vector& epsilon, double gamma) {
    if (epsilon.size() != X.rows()) {
        throw ContractViolation("residual length does not match sample count");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw ContractViolation("gamma must lie in (0, 1]");
    }
    const double n = static_cast<double>(X.rows());
    return 4.0 * (2.0 - gamma) / (n * gamma) *
           (X.transpose() * epsilon).lpNorm<Eigen::Infinity>();
}

bool event_holds(const Matrix& X, const Vector& epsilon, double gamma, double lambda) {
    if (!(lambda > 0.0)) {
        throw ContractViolation("lambda must be positive");
    }
    return event_threshold(X, epsilon, gamma) <= lambda;
}

double theorem1_bound(const AssumptionDiagnostics& diagnostics, double lambda) {
    if (!diagnostics.assumptions_hold || !diagnostics.a || !diagnostics.c_min) {
        throw ContractViolation("sup-norm bound is undefined: design assumptions do not hold");
    }
    return 1.5 * (*diagnostics.a) * lambda / (*diagnostics.c_min);
}

}  // namespace sparselogit
