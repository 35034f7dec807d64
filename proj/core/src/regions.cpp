#include "windgen/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "windgen/errors.hpp"
#include "windgen/stats.hpp"

namespace windgen {

std::vector<int> Partition::sizes() const {
	std::vector<int> out(static_cast<std::size_t>(std::max(n_clusters, 0)), 0);
	for (int label : assignment) {
		if (label >= 1 && label <= n_clusters) ++out[label - 1];
	}
	return out;
}

std::vector<int> Partition::members(int label) const {
	std::vector<int> out;
	for (std::size_t i = 0; i < assignment.size(); ++i) {
		if (assignment[i] == label) out.push_back(static_cast<int>(i));
	}
	return out;
}

void Partition::validate(int n_points) const {
	if (static_cast<int>(assignment.size()) != n_points) {
		throw DataError("partition covers " + std::to_string(assignment.size()) +
		                " points, grid has " + std::to_string(n_points));
	}
	if (n_clusters < 1 || n_clusters > n_points) {
		throw DataError("partition has an invalid number of clusters");
	}
	for (int label : assignment) {
		if (label < 1 || label > n_clusters) {
			throw DataError("partition label " + std::to_string(label) + " out of range");
		}
	}
	for (int s : sizes()) {
		if (s == 0) throw DataError("partition has an empty cluster");
	}
}

WardResult ward_clustering(const Eigen::MatrixXd& features, int n_clusters) {
	const int n = static_cast<int>(features.rows());
	if (n_clusters < 1 || n_clusters > n) {
		throw ConfigError("number of clusters must lie in [1, " + std::to_string(n) + "]");
	}
	if (!features.allFinite()) {
		throw DataError("non-finite clustering feature");
	}
	// d(a,b) holds twice the Ward merge cost, starting from squared distances.
	Eigen::MatrixXd d(n, n);
	for (int a = 0; a < n; ++a) {
		for (int b = 0; b < n; ++b) {
			d(a, b) = (features.row(a) - features.row(b)).squaredNorm();
		}
	}
	std::vector<int> size(static_cast<std::size_t>(n), 1);
	std::vector<int> rep(static_cast<std::size_t>(n));
	std::iota(rep.begin(), rep.end(), 0);
	std::vector<int> owner(static_cast<std::size_t>(n));
	std::iota(owner.begin(), owner.end(), 0);
	std::vector<bool> active(static_cast<std::size_t>(n), true);

	WardResult result;
	for (int remaining = n; remaining > n_clusters; --remaining) {
		int best_a = -1;
		int best_b = -1;
		double best = std::numeric_limits<double>::infinity();
		std::pair<int, int> best_key{n, n};
		for (int a = 0; a < n; ++a) {
			if (!active[a]) continue;
			for (int b = a + 1; b < n; ++b) {
				if (!active[b]) continue;
				const std::pair<int, int> key{std::min(rep[a], rep[b]), std::max(rep[a], rep[b])};
				if (d(a, b) < best || (d(a, b) == best && key < best_key)) {
					best = d(a, b);
					best_key = key;
					best_a = a;
					best_b = b;
				}
			}
		}
		result.merge_costs.push_back(0.5 * best);
		const double na = size[best_a];
		const double nb = size[best_b];
		for (int k = 0; k < n; ++k) {
			if (!active[k] || k == best_a || k == best_b) continue;
			const double nk = size[k];
			const double v = ((na + nk) * d(k, best_a) + (nb + nk) * d(k, best_b) - nk * best) /
			                 (na + nb + nk);
			d(k, best_a) = v;
			d(best_a, k) = v;
		}
		size[best_a] += size[best_b];
		rep[best_a] = std::min(rep[best_a], rep[best_b]);
		active[best_b] = false;
		for (auto& o : owner) {
			if (o == best_b) o = best_a;
		}
	}

	// Canonical labels: clusters ordered by smallest member.
	std::vector<int> label_of(static_cast<std::size_t>(n), 0);
	int next = 0;
	result.partition.n_clusters = n_clusters;
	result.partition.assignment.resize(static_cast<std::size_t>(n));
	for (int i = 0; i < n; ++i) {
		int& lab = label_of[owner[i]];
		if (lab == 0) lab = ++next;
		result.partition.assignment[i] = lab;
	}
	return result;
}

FeatureMode parse_feature_mode(const std::string& name) {
	if (name == "corr") return FeatureMode::Correlation;
	if (name == "moments+coords") return FeatureMode::MomentsCoords;
	throw ConfigError("unknown feature mode '" + name + "'");
}

std::string feature_mode_name(FeatureMode m) {
	return m == FeatureMode::Correlation ? "corr" : "moments+coords";
}

Eigen::MatrixXd build_features(const Eigen::MatrixXd& residuals, FeatureMode mode,
                               const GridMeta& meta) {
	if (mode == FeatureMode::Correlation) {
		return stats::correlation(residuals);
	}
	const Eigen::Index n = residuals.cols();
	Eigen::MatrixXd f(n, 4);
	f.col(0) = stats::column_skewness(residuals);
	f.col(1) = stats::column_excess_kurtosis(residuals);
	for (Eigen::Index i = 0; i < n; ++i) {
		f(i, 2) = meta.points.at(static_cast<std::size_t>(i)).lat;
		f(i, 3) = meta.points.at(static_cast<std::size_t>(i)).lon;
	}
	for (Eigen::Index c = 0; c < 4; ++c) {
		const double mu = f.col(c).mean();
		const double sd = std::sqrt((f.col(c).array() - mu).square().mean());
		f.col(c) = (f.col(c).array() - mu) / (sd > 0.0 ? sd : 1.0);
	}
	return f;
}

std::vector<int> contiguity_components(const Partition& partition, const GridMeta& meta) {
	std::vector<int> out(static_cast<std::size_t>(partition.n_clusters), 0);
	const int n = static_cast<int>(partition.assignment.size());
	std::vector<bool> seen(static_cast<std::size_t>(n), false);
	std::vector<int> stack;
	for (int start = 0; start < n; ++start) {
		if (seen[start]) continue;
		const int label = partition.assignment[start];
		++out[label - 1];
		stack.push_back(start);
		seen[start] = true;
		while (!stack.empty()) {
			const int p = stack.back();
			stack.pop_back();
			for (const auto& nb : meta.neighbors[p]) {
				if (!seen[nb.id] && partition.assignment[nb.id] == label) {
					seen[nb.id] = true;
					stack.push_back(nb.id);
				}
			}
		}
	}
	return out;
}

}  // namespace windgen
