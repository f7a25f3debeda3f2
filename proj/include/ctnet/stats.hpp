#pragma once

#include <Eigen/Dense>

namespace ctnet {

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation (modified Lentz).
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p-value of a Student t statistic with dof degrees of freedom.
double student_t_two_sided_p(double t, double dof);

// One-sample two-sided t-test of zero mean.  Returns the p-value; the t
// statistic is written to *t_out when given.
double t_test_zero_mean(const Eigen::VectorXd& samples, double* t_out = nullptr);

}  // namespace ctnet
