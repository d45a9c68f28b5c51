#pragma once

#include <Eigen/Dense>
#include <functional>

namespace evc {

// Quantile of the standard normal. Rational initial guess refined by one
// Halley step on erfc, accurate to full double precision away from 0 and 1.
double normal_quantile(double p);

// Two-sided Kolmogorov-Smirnov statistic of a sample against a continuous
// CDF. The sample is copied and sorted internally.
double ks_statistic(const Eigen::VectorXd& sample,
                    const std::function<double(double)>& cdf);

// Asymptotic critical value for the KS statistic at significance alpha:
// D_crit = sqrt(-ln(alpha/2)/2) / sqrt(n).
double ks_critical(double alpha, std::size_t n);

// Column means and the unbiased sample covariance of the rows of x.
Eigen::VectorXd col_mean(const Eigen::MatrixXd& x);
Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& x);

}  // namespace evc
