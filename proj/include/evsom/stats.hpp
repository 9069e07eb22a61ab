#pragma once

#include <Eigen/Core>

namespace evsom {

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// CDF of Student's t with `dof` degrees of freedom.
double student_t_cdf(double t, int dof);

/// Two-sided critical value c with P(|T| > c) = theta for Student's t.
/// theta >= 1 yields 0 (everything exceeds the threshold).
double student_t_critical(double theta, int dof);

/// Pearson correlation. Sets *degenerate when either series has zero variance
/// (the returned value is then 0).
double pearson_correlation(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& y,
                           bool* degenerate = nullptr);

}  // namespace evsom
