#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "windgen/grid_data.hpp"

namespace windgen {

/// Assignment of gridpoints to regions labelled 1..n_clusters.
struct Partition {
	int n_clusters = 0;
	std::vector<int> assignment;

	std::vector<int> sizes() const;
	/// Gridpoint ids (ascending) carrying the given label.
	std::vector<int> members(int label) const;
	/// Throws DataError unless labels are contiguous, every cluster is
	/// nonempty and the assignment covers n_points.
	void validate(int n_points) const;
};

struct WardResult {
	Partition partition;
	/// Increase in within-cluster sum of squares of each merge, in order.
	std::vector<double> merge_costs;
};

/// Agglomerative Ward clustering of the rows of `features` with
/// Lance-Williams updates, cut at n_clusters. Equal-cost merges go to the
/// pair whose (smaller, larger) representative ids are lexicographically
/// smallest, a cluster being represented by its smallest member id.
/// Output labels are ordered by each cluster's smallest member.
WardResult ward_clustering(const Eigen::MatrixXd& features, int n_clusters);

inline Partition cluster_ward(const Eigen::MatrixXd& features, int n_clusters) {
	return ward_clustering(features, n_clusters).partition;
}

enum class FeatureMode {
	/// Row i of the residual correlation matrix.
	Correlation,
	/// (skewness, excess kurtosis, lat, lon), each column z-scored.
	MomentsCoords,
};

FeatureMode parse_feature_mode(const std::string& name);
std::string feature_mode_name(FeatureMode m);

Eigen::MatrixXd build_features(const Eigen::MatrixXd& residuals, FeatureMode mode,
                               const GridMeta& meta);

/// Number of stencil-connected components inside each cluster.
std::vector<int> contiguity_components(const Partition& partition, const GridMeta& meta);

}  // namespace windgen
