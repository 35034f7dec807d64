#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "windgen/grid_data.hpp"

namespace windgen {

enum class Lag { A1 = 1, A2 = 2 };

struct RestrictionEntry {
	Lag lag;
	int row;
	int col;

	friend bool operator==(const RestrictionEntry&, const RestrictionEntry&) = default;
};

std::string entry_name(const RestrictionEntry& e);

enum class StencilScheme {
	/// A1: self plus N/S/E/W neighbors; A2: diagonal.
	Stencil,
	/// A1 and A2 diagonal.
	Diagonal,
	/// Unrestricted VAR(2).
	Dense,
};

StencilScheme parse_scheme(const std::string& name);
std::string scheme_name(StencilScheme s);

/// Allowed nonzero coefficients of (A1, A2), sorted by row, then lag, then column.
struct Restrictions {
	int n_points = 0;
	std::vector<RestrictionEntry> entries;

	std::size_t size() const noexcept { return entries.size(); }
	/// Indices into `entries` grouped by equation row.
	std::vector<std::vector<std::size_t>> by_row() const;
	bool allows(Lag lag, int row, int col) const;
};

Restrictions build_restrictions(const GridMeta& meta,
                                StencilScheme scheme = StencilScheme::Stencil);

enum class Estimator { OLS, GLS };

Estimator parse_estimator(const std::string& name);
std::string estimator_name(Estimator e);

struct StabilityReport {
	bool stable = false;
	double max_modulus = 0.0;
};

/// [[A1, A2], [I, 0]].
Eigen::MatrixXd companion_matrix(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2);
StabilityReport check_stability(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2);

/// Second-moment sufficient statistics of the stacked regression
/// W_t = B Z_t + e_t with Z_t = (W_{t-1}, W_{t-2}).
struct LaggedMoments {
	Eigen::MatrixXd zz;  // 2N x 2N, sum of Z_t Z_t^T
	Eigen::MatrixXd zw;  // 2N x N, sum of Z_t W_t^T
	long n_obs = 0;
};

LaggedMoments lagged_moments(const EnsembleSeries& series);

/// Restricted estimator gamma = [R'(ZZ' (x) S^-1)R]^-1 R'(Z (x) S^-1) vec(W);
/// returns one value per restriction entry.
Eigen::VectorXd restricted_gls(const LaggedMoments& moments, const Restrictions& restr,
                               const Eigen::MatrixXd& sigma_inv);

/// Equation-by-equation least squares, identical to restricted_gls with S = I.
Eigen::VectorXd restricted_ols(const LaggedMoments& moments, const Restrictions& restr);

/// Significance of one coefficient under i.i.d. innovations.
struct CoefficientTest {
	RestrictionEntry entry;
	double value = 0.0;
	double std_error = 0.0;
	double t_stat = 0.0;
	double p_value = 1.0;
	/// Benjamini-Hochberg rejection at the report's level.
	bool significant = false;
};

struct VarModel {
	Restrictions restrictions;
	Estimator estimator = Estimator::OLS;
	Eigen::MatrixXd a1;
	Eigen::MatrixXd a2;
	/// One row per (training member, t = 3..T), one column per gridpoint.
	Eigen::MatrixXd residuals;
	int n_members = 0;
	double max_modulus = 0.0;
	bool stable = false;
	std::vector<CoefficientTest> significance;

	int n_points() const noexcept { return restrictions.n_points; }
};

/// Fits the restricted VAR(2) to a standardized series, pooling all its
/// realizations as i.i.d. replicates.
VarModel fit_var(const EnsembleSeries& standardized, const Restrictions& restr,
                 Estimator estimator = Estimator::OLS, double fdr_level = 0.01);

/// e_t = W_t - A1 W_{t-1} - A2 W_{t-2} for t = 3..T of every realization.
Eigen::MatrixXd var_residuals(const EnsembleSeries& series, const Eigen::MatrixXd& a1,
                              const Eigen::MatrixXd& a2);

struct ResidualMoments {
	Eigen::VectorXd skewness;
	Eigen::VectorXd excess_kurtosis;
	Eigen::MatrixXd correlation;
};

ResidualMoments residual_moments(const Eigen::MatrixXd& residuals);
inline ResidualMoments residual_moments(const VarModel& model) {
	return residual_moments(model.residuals);
}

/// Benjamini-Hochberg step-up; returns the rejection mask.
std::vector<bool> benjamini_hochberg(std::span<const double> p_values, double level);

}  // namespace windgen
