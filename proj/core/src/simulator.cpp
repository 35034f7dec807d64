#include "windgen/simulator.hpp"

#include <cmath>

#include <Eigen/SparseCore>

#include "windgen/errors.hpp"
#include "windgen/var_model.hpp"

namespace windgen {

InnovationFamily parse_family(const std::string& name) {
	if (name == "skew-t" || name == "skewt") return InnovationFamily::SkewT;
	if (name == "gaussian") return InnovationFamily::Gaussian;
	throw ConfigError("unknown innovation family '" + name + "'");
}

std::string family_name(InnovationFamily f) {
	return f == InnovationFamily::SkewT ? "skew-t" : "gaussian";
}

void GeneratorBundle::validate() const {
	if (!meta) {
		throw ConfigError("generator bundle has no grid");
	}
	const auto n = static_cast<Eigen::Index>(meta->size());
	if (seasonal.n_points() != n || a1.rows() != n || a1.cols() != n || a2.rows() != n ||
	    a2.cols() != n) {
		throw DataError("generator bundle parts disagree on the number of gridpoints");
	}
	partition.validate(static_cast<int>(n));
	if (static_cast<int>(regions.size()) != partition.n_clusters) {
		throw DataError("generator bundle needs one skew-t fit per region");
	}
	std::vector<int> covered(static_cast<std::size_t>(n), 0);
	for (const auto& reg : regions) {
		if (reg.members != partition.members(reg.id)) {
			throw DataError("region " + std::to_string(reg.id) + " members disagree with the partition");
		}
		for (int m : reg.members) ++covered[m];
	}
	for (int c : covered) {
		if (c != 1) throw DataError("regions do not cover every gridpoint exactly once");
	}
	const auto stab = check_stability(a1, a2);
	if (!stab.stable) {
		throw NumericalError("VAR is not stable (max modulus " + std::to_string(stab.max_modulus) +
		                     "); refusing to simulate");
	}
}

RegionInnovations::RegionInnovations(const RegionSkewT& region, InnovationFamily family)
    : members_(region.members), family_(family) {
	const auto d = static_cast<Eigen::Index>(members_.size());
	scale_ = Eigen::VectorXd::Ones(d);
	for (Eigen::Index k = 0; k < d && k < region.residual_sd.size(); ++k) {
		const double v = region.residual_sd[k] * region.residual_sd[k];
		if (std::abs(v - 1.0) > 0.01) scale_[k] = region.residual_sd[k];
	}
	const Eigen::MatrixXd base_cov = st_covariance(region.dp);
	cov_ = scale_.asDiagonal() * base_cov * scale_.asDiagonal();
	work_.resize(d);
	if (family_ == InnovationFamily::SkewT) {
		sampler_ = std::make_unique<SkewTSampler>(region.dp);
		mean_ = st_mean(region.dp);
	} else {
		Eigen::LLT<Eigen::MatrixXd> llt(base_cov);
		if (llt.info() != Eigen::Success) {
			throw NumericalError("region covariance is not positive definite");
		}
		chol_ = llt.matrixL();
		mean_ = Eigen::VectorXd::Zero(d);
	}
}

void RegionInnovations::draw(Rng& rng, Eigen::Ref<Eigen::VectorXd> out) {
	if (family_ == InnovationFamily::SkewT) {
		sampler_->draw(rng, work_);
		out = (work_ - mean_).cwiseProduct(scale_);
	} else {
		for (Eigen::Index k = 0; k < work_.size(); ++k) work_[k] = normal_(rng);
		out = (chol_.triangularView<Eigen::Lower>() * work_).cwiseProduct(scale_);
	}
}

void RegionInnovations::reset() {
	normal_.reset();
	if (sampler_) sampler_->reset();
}

EnsembleSeries simulate_standardized(const GeneratorBundle& bundle, const SimulateOptions& opts) {
	bundle.validate();
	if (opts.burn_in_days < 0 || opts.n_realizations < 0 || opts.n_years < 0) {
		throw ConfigError("simulation sizes must be nonnegative");
	}
	const int n = static_cast<int>(bundle.meta->size());
	EnsembleSeries out(bundle.meta, Calendar365{opts.start_year, opts.n_years},
	                   opts.n_realizations, Scale::Standardized);
	const Eigen::SparseMatrix<double> a1 = bundle.a1.sparseView();
	const Eigen::SparseMatrix<double> a2 = bundle.a2.sparseView();

	std::vector<RegionInnovations> gens;
	gens.reserve(bundle.regions.size());
	for (const auto& reg : bundle.regions) gens.emplace_back(reg, bundle.family);

	const int total = opts.burn_in_days + out.n_days();
	Eigen::VectorXd prev1(n);
	Eigen::VectorXd prev2(n);
	Eigen::VectorXd cur(n);
	Eigen::VectorXd eps(n);
	std::vector<Eigen::VectorXd> draws;
	for (const auto& g : gens) draws.emplace_back(static_cast<Eigen::Index>(g.members().size()));

	for (int r = 0; r < opts.n_realizations; ++r) {
		std::vector<Rng> streams;
		streams.reserve(gens.size());
		for (const auto& reg : bundle.regions) {
			streams.emplace_back(stream_seed(bundle.master_seed, static_cast<std::uint64_t>(reg.id),
			                                 static_cast<std::uint64_t>(r)));
		}
		for (auto& g : gens) g.reset();
		prev1.setZero();
		prev2.setZero();
		for (int step = 0; step < total; ++step) {
			for (std::size_t c = 0; c < gens.size(); ++c) {
				gens[c].draw(streams[c], draws[c]);
				const auto& mem = gens[c].members();
				for (std::size_t k = 0; k < mem.size(); ++k) eps[mem[k]] = draws[c][static_cast<Eigen::Index>(k)];
			}
			cur.noalias() = a1 * prev1;
			cur.noalias() += a2 * prev2;
			cur += eps;
			prev2.swap(prev1);
			prev1 = cur;
			const int t = step - opts.burn_in_days;
			if (t >= 0) {
				auto row = out.day(r, t);
				for (int i = 0; i < n; ++i) row[i] = cur[i];
			}
		}
	}
	return out;
}

EnsembleSeries simulate(const GeneratorBundle& bundle, const SimulateOptions& opts) {
	return destandardize(simulate_standardized(bundle, opts), bundle.seasonal);
}

}  // namespace windgen
