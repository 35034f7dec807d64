#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "windgen/grid_data.hpp"
#include "windgen/regions.hpp"
#include "windgen/seasonal.hpp"
#include "windgen/skewt.hpp"

namespace windgen {

enum class InnovationFamily { SkewT, Gaussian };

InnovationFamily parse_family(const std::string& name);
std::string family_name(InnovationFamily f);

/// Everything needed to generate synthetic series.
struct GeneratorBundle {
	std::shared_ptr<const GridMeta> meta;
	SeasonalModel seasonal;
	Eigen::MatrixXd a1;
	Eigen::MatrixXd a2;
	Partition partition;
	std::vector<RegionSkewT> regions;
	InnovationFamily family = InnovationFamily::SkewT;
	std::uint64_t master_seed = 0;

	/// Throws unless all parts agree on the grid; throws NumericalError if
	/// the VAR is not stable.
	void validate() const;
};

struct SimulateOptions {
	int n_realizations = 30;
	int n_years = 1;
	int burn_in_days = 1000;
	int start_year = 1;
};

/// Simulated series on the standardized (residual) scale.
EnsembleSeries simulate_standardized(const GeneratorBundle& bundle, const SimulateOptions& opts);

/// Simulated series in m/s. Negative values are kept.
EnsembleSeries simulate(const GeneratorBundle& bundle, const SimulateOptions& opts);

/// Mean-zero innovation draws of one region, in member order.
class RegionInnovations {
public:
	RegionInnovations(const RegionSkewT& region, InnovationFamily family);

	const std::vector<int>& members() const noexcept { return members_; }
	void draw(Rng& rng, Eigen::Ref<Eigen::VectorXd> out);
	void reset();

	/// Covariance of the emitted draws.
	const Eigen::MatrixXd& covariance() const noexcept { return cov_; }

private:
	std::vector<int> members_;
	InnovationFamily family_;
	std::unique_ptr<SkewTSampler> sampler_;
	Eigen::VectorXd mean_;
	Eigen::VectorXd scale_;
	Eigen::MatrixXd chol_;
	Eigen::MatrixXd cov_;
	Eigen::VectorXd work_;
	std::normal_distribution<double> normal_;
};

}  // namespace windgen
