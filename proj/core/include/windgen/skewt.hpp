#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "windgen/grid_data.hpp"
#include "windgen/rng.hpp"

namespace windgen {

/// Direct parameterization ST_d(xi, Omega, alpha, nu).
struct SkewTParamsDP {
	Eigen::VectorXd xi;
	Eigen::MatrixXd omega;  // scale matrix, SPD
	Eigen::VectorXd alpha;
	double nu = 0.0;

	int dim() const noexcept { return static_cast<int>(xi.size()); }
	/// Square roots of the diagonal of omega.
	Eigen::VectorXd scales() const;
	/// omega rescaled to unit diagonal.
	Eigen::MatrixXd correlation() const;
	/// Throws ConfigError on inconsistent sizes, non-SPD omega or nu <= 0.
	void validate() const;
};

/// Centered parameterization: mean, covariance, marginal skewnesses and
/// Mardia excess kurtosis.
struct SkewTParamsCP {
	Eigen::VectorXd mu;
	Eigen::MatrixXd sigma;
	Eigen::VectorXd gamma1;
	double gamma2m = 0.0;

	int dim() const noexcept { return static_cast<int>(mu.size()); }
};

/// E|T_nu| scaled: sqrt(nu) Gamma((nu-1)/2) / (sqrt(pi) Gamma(nu/2)), nu > 1.
double b_nu(double nu);

/// delta = (1 + alpha' Obar alpha)^{-1/2} Obar alpha.
Eigen::VectorXd delta_from_alpha(const Eigen::MatrixXd& corr, const Eigen::VectorXd& alpha);
/// Inverse of delta_from_alpha; requires delta' Obar^{-1} delta < 1.
Eigen::VectorXd alpha_from_delta(const Eigen::MatrixXd& corr, const Eigen::VectorXd& delta);

/// Skewness of the univariate skew-t with shape delta, nu > 3.
double st_skewness(double delta, double nu);
/// Excess kurtosis of the univariate skew-t with shape delta, nu > 4.
double st_excess_kurtosis(double delta, double nu);
/// Mardia excess kurtosis of ST_d given beta0^2 = mu0' Sigma^{-1} mu0, nu > 4.
double st_mardia_kurtosis(int d, double nu, double beta0_sq);

/// Mean (nu > 1) and covariance (nu > 2) of ST_d.
Eigen::VectorXd st_mean(const SkewTParamsDP& dp);
Eigen::MatrixXd st_covariance(const SkewTParamsDP& dp);

/// Closed-form centered parameters; throws NumericalError for nu <= 4.
SkewTParamsCP dp_moments(const SkewTParamsDP& dp);

/// Inverts the moment relations for given (delta, nu): recovers
/// (xi, Omega, alpha) from the mean and covariance.
SkewTParamsDP dp_from_delta(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                            const Eigen::VectorXd& delta, double nu);

struct CpToDpOptions {
	/// Squared l2 distance below which the inversion counts as exact.
	double tol = 1e-10;
	int max_iterations = 500;
	double max_nu = 1e6;
};

struct CpToDpResult {
	SkewTParamsDP dp;
	Eigen::VectorXd delta;
	/// Squared l2 distance between (gamma1, gamma2m) implied by dp and the target.
	double distance = 0.0;
	int iterations = 0;
	bool converged = false;
};

/// Numerical CP -> DP map: Levenberg-Marquardt over (atanh delta, log(nu - 4))
/// matching marginal skewnesses and Mardia kurtosis, followed by the
/// closed-form reconstruction of (xi, Omega, alpha). A target outside the
/// feasible set yields the closest DP with converged = false.
CpToDpResult cp_to_dp(const SkewTParamsCP& cp, const CpToDpOptions& opts = {});

/// Precomputed evaluator of the density.
class SkewTDensity {
public:
	explicit SkewTDensity(SkewTParamsDP dp);
	double log_pdf(const Eigen::VectorXd& z) const;
	double pdf(const Eigen::VectorXd& z) const;

private:
	SkewTParamsDP dp_;
	Eigen::LLT<Eigen::MatrixXd> llt_;
	Eigen::VectorXd inv_scales_;
	double log_norm_ = 0.0;
};

double density(const Eigen::VectorXd& z, const SkewTParamsDP& dp);

/// Draws via the skew-normal conditioning representation divided by an
/// independent sqrt(chi2_nu / nu).
class SkewTSampler {
public:
	explicit SkewTSampler(const SkewTParamsDP& dp);

	int dim() const noexcept { return static_cast<int>(xi_.size()); }
	void draw(Rng& rng, Eigen::Ref<Eigen::VectorXd> out);
	/// Drops cached distribution state so the next draw depends only on the engine.
	void reset();

private:
	Eigen::VectorXd xi_;
	Eigen::VectorXd scales_;
	Eigen::MatrixXd chol_;  // lower factor of [[1, delta'], [delta, Obar]]
	Eigen::VectorXd work_;
	std::normal_distribution<double> normal_;
	std::gamma_distribution<double> gamma_;
	double nu_;
};

/// n x d matrix of draws.
Eigen::MatrixXd sample(const SkewTParamsDP& dp, int n, Rng& rng);

/// Matern correlation with range phi and smoothness kappa; kappa = 1.5
/// reduces to (1 + h/phi) exp(-h/phi).
double matern_correlation(double h, double phi, double kappa = 1.5);
Eigen::MatrixXd matern_matrix(const Eigen::MatrixXd& distances, double phi, double kappa = 1.5);

/// Least-squares range fit over the strict upper triangle.
double fit_matern(const Eigen::MatrixXd& corr, const Eigen::MatrixXd& distances,
                  double kappa = 1.5);

/// Great-circle distance in km.
double haversine_km(double lat1, double lon1, double lat2, double lon2);
Eigen::MatrixXd distance_matrix(const GridMeta& meta, std::span<const int> ids);

struct RegionFitOptions {
	double kappa = 1.5;
	/// Marginal-skewness MSE above which the sample Mardia kurtosis is replaced.
	double gamma1_mse_threshold = 0.05;
	CpToDpOptions cp;
};

struct RegionDiagnostics {
	double cp_distance = 0.0;
	bool converged = false;
	double mse_gamma1 = 0.0;
	double mse_gamma2 = 0.0;
	double gamma2m_sample = 0.0;
	double gamma2m_used = 0.0;
	bool gamma2m_replaced = false;
};

/// Skew-t innovation law of one region, on the unit-variance residual scale.
struct RegionSkewT {
	int id = 0;
	std::vector<int> members;
	SkewTParamsDP dp;
	double matern_phi = 0.0;
	double matern_kappa = 1.5;
	/// Per-member residual SD; innovations are rescaled by it at simulation time.
	Eigen::VectorXd residual_sd;
	Eigen::VectorXd sample_gamma1;
	Eigen::VectorXd sample_gamma2;
	RegionDiagnostics diagnostics;
};

/// Method-of-moments fit: mean zero, Matern correlation, sample marginal
/// skewness and Mardia kurtosis, mapped to DP. `residuals` holds one column
/// per member, pooled over time and training members.
RegionSkewT fit_region(int id, const Eigen::MatrixXd& residuals, std::span<const int> members,
                       const GridMeta& meta, const RegionFitOptions& opts = {});

}  // namespace windgen
