#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "windgen/grid_data.hpp"

namespace windgen {

/// Basis row [1, sin(2 pi d/365), cos(2 pi d/365), ..., sin(2 pi K d/365), cos(...)].
Eigen::VectorXd harmonic_basis(int day_of_year, int n_harmonics);

/// Least-squares harmonic fit to one value per calendar day.
Eigen::VectorXd fit_harmonics(std::span<const double> day_targets, int n_harmonics);

/// Per-gridpoint day-of-year mean and standard deviation cycles, shared by
/// every ensemble member.
struct SeasonalModel {
	int n_harmonics = 5;
	std::vector<Eigen::VectorXd> mean_coefs;
	std::vector<Eigen::VectorXd> sd_coefs;

	int n_points() const noexcept { return static_cast<int>(mean_coefs.size()); }
	double mean(int point, int day_of_year) const;
	double sd(int point, int day_of_year) const;

	/// Zero mean, unit SD; used when the input is already on the residual scale.
	static SeasonalModel identity(int n_points, int n_harmonics = 5);
};

struct SeasonalOptions {
	int n_harmonics = 5;
	/// Minimum admissible fitted SD, relative to the point's overall residual SD.
	double sd_floor = 1e-3;
};

SeasonalModel fit_seasonal(const EnsembleSeries& series, const SeasonalOptions& opts = {});

/// (value - mu) / sigma for every (r, t, i).
EnsembleSeries standardize(const EnsembleSeries& series, const SeasonalModel& model);

/// mu + sigma * value; inverse of standardize.
EnsembleSeries destandardize(const EnsembleSeries& series, const SeasonalModel& model);

}  // namespace windgen
