#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace windgen::stats {

double mean(std::span<const double> x);

/// Moment estimator m3 / m2^(3/2).
double skewness(std::span<const double> x);

/// Moment estimator m4 / m2^2 - 3.
double excess_kurtosis(std::span<const double> x);

/// Column-wise versions over an n x d sample matrix.
Eigen::VectorXd column_skewness(const Eigen::MatrixXd& x);
Eigen::VectorXd column_excess_kurtosis(const Eigen::MatrixXd& x);

/// Maximum-likelihood (1/n) covariance of the rows of x.
Eigen::MatrixXd covariance(const Eigen::MatrixXd& x);
Eigen::MatrixXd correlation(const Eigen::MatrixXd& x);

/// Sample Mardia excess kurtosis: mean of squared Mahalanobis distances
/// (with the 1/n covariance) minus d(d+2).
double mardia_kurtosis(const Eigen::MatrixXd& x);

/// Linear interpolation between order statistics: h = (n-1)p.
/// `sorted` must be ascending and nonempty.
double quantile_sorted(std::span<const double> sorted, double p);
std::vector<double> quantiles(std::vector<double> x, std::span<const double> probs);

double median(std::vector<double> x);

}  // namespace windgen::stats
