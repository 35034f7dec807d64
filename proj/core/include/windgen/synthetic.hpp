#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "windgen/bundle_io.hpp"
#include "windgen/simulator.hpp"

namespace windgen {

/// Known-truth generator used for recovery and end-to-end checks.
struct SyntheticTruthOptions {
	int nx = 5;
	int ny = 5;
	double lat0 = 20.0;
	double lon0 = 40.0;
	double spacing = 1.0;
	/// Companion-matrix spectral radius of the truth VAR.
	double spectral_radius = 0.8;
	double a2_diagonal = -0.1;
	/// Skew-t innovations on a quadrant partition when true; otherwise one
	/// region of independent standard Gaussian innovations.
	bool skewed = true;
	double matern_phi_km = 150.0;
	double nu = 12.0;
	/// Per-region common delta; cycled when there are more regions.
	std::vector<double> region_delta{0.85, 0.8, 0.85, 0.9};
	double mean_level = 10.0;
	double sd_level = 0.9;
	InnovationFamily family = InnovationFamily::SkewT;
	std::uint64_t seed = 20160101;
};

/// Unscaled stencil pattern (self and N/S/E/W weights varying mildly by point).
Eigen::MatrixXd stencil_pattern(const GridMeta& meta);

/// Scales `pattern` by bisection so that [[c P, A2], [I, 0]] has the
/// requested spectral radius.
Eigen::MatrixXd scale_to_radius(const Eigen::MatrixXd& pattern, const Eigen::MatrixXd& a2,
                                double radius);

/// Quadrant partition of an nx-by-ny lattice: columns split at ceil(nx/2),
/// rows at ceil(ny/2).
Partition quadrant_partition(int nx, int ny);

/// Truth bundle: harmonic seasonal cycle, stencil VAR(2) and skew-t regions
/// whose CP has zero mean and the Matern correlation. With skewed = false the
/// regions are Gaussian (alpha = 0, nu = 1e6) with identity correlation.
struct SyntheticTruth {
	GeneratorBundle bundle;
	VarCoefficients var;
};

SyntheticTruth make_truth(const SyntheticTruthOptions& opts);

}  // namespace windgen
