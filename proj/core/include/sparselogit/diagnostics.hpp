#pragma once

#include <sparselogit/model.hpp>

#include <optional>

namespace sparselogit {

/// Design-side constants of the support-recovery theory, evaluated at a known
/// true parameter beta* with support S.
///
/// Weighted Gram on the support: H = X_S' W X_S with W = diag(w(x_i, beta*)).
///   c_min  smallest eigenvalue of H / n
///   c_max  largest eigenvalue of X'X / n
///   gamma  1 - |||X_{S^c}' W X_S H^{-1}|||_inf   (irrepresentability margin;
///          max over irrelevant predictors j of ||H^{-1} X_S' W x_j||_1)
///   a      |||H^{-1}|||_inf / |||H^{-1}|||_2
///   c_b    max |X_ij|
/// c_min, gamma, a and lambda_cap are empty when S is empty; gamma, a and
/// lambda_cap are also empty when H is singular (c_min is then reported as 0).
struct AssumptionDiagnostics {
    std::optional<double> c_min;
    double c_max = 0.0;
    std::optional<double> gamma;
    std::optional<double> a;
    double c_b = 0.0;
    // gamma c_min^2 / (100 c_b (2 - gamma) s c_max), the largest lambda the
    // finite-sample bounds are stated for.
    std::optional<double> lambda_cap;
    std::size_t support_size = 0;
    bool assumptions_hold = false;
};

// w(x_i, beta*) = exp(x_i'beta*) / (1 + exp(x_i'beta*))^2, each in (0, 1/4].
Vector hessian_weights(const Matrix& X, const Coefficients& beta_star);

AssumptionDiagnostics assumption_quantities(const Matrix& X, const Coefficients& beta_star,
                                            const IndexSet& support);

// 4 (2 - gamma) / (n gamma) * ||X' epsilon||_inf: the smallest lambda for
// which the noise event holds.
double event_threshold(const Matrix& X, const Vector& epsilon, double gamma);

// Evaluates 4 (2 - gamma) / (n gamma) * ||X' epsilon||_inf <= lambda.
bool event_holds(const Matrix& X, const Vector& epsilon, double gamma, double lambda);

// 1.5 a lambda / c_min. Throws ContractViolation unless assumptions_hold.
double theorem1_bound(const AssumptionDiagnostics& diagnostics, double lambda);

}  // namespace sparselogit
