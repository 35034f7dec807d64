#include "windgen/synthetic.hpp"

#include <cmath>

#include "windgen/errors.hpp"

namespace windgen {

Eigen::MatrixXd stencil_pattern(const GridMeta& meta) {
	const auto n = static_cast<Eigen::Index>(meta.size());
	Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
	for (Eigen::Index i = 0; i < n; ++i) {
		p(i, i) = 0.45 + 0.02 * static_cast<double>(i % 5);
		for (const auto& nb : meta.neighbors[i]) {
			switch (nb.dir) {
				case Direction::North: p(i, nb.id) = 0.12; break;
				case Direction::South: p(i, nb.id) = 0.05; break;
				case Direction::East: p(i, nb.id) = 0.09; break;
				case Direction::West: p(i, nb.id) = 0.07; break;
			}
		}
	}
	return p;
}

Eigen::MatrixXd scale_to_radius(const Eigen::MatrixXd& pattern, const Eigen::MatrixXd& a2,
                                double radius) {
	if (!(radius > 0.0)) {
		throw ConfigError("target spectral radius must be positive");
	}
	auto rho = [&](double c) { return check_stability(c * pattern, a2).max_modulus; };
	if (rho(0.0) >= radius) {
		throw ConfigError("A2 alone already reaches the target spectral radius");
	}
	double lo = 0.0;
	double hi = 1.0;
	while (rho(hi) < radius) {
		hi *= 2.0;
		if (hi > 1e6) throw NumericalError("cannot reach the target spectral radius");
	}
	for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
		const double mid = 0.5 * (lo + hi);
		(rho(mid) < radius ? lo : hi) = mid;
	}
	return 0.5 * (lo + hi) * pattern;
}

Partition quadrant_partition(int nx, int ny) {
	const int cx = (nx + 1) / 2;
	const int cy = (ny + 1) / 2;
	Partition p;
	p.assignment.resize(static_cast<std::size_t>(nx) * ny);
	for (int row = 0; row < ny; ++row) {
		for (int col = 0; col < nx; ++col) {
			const int q = (row < cy ? 0 : 2) + (col < cx ? 0 : 1);
			p.assignment[static_cast<std::size_t>(row) * nx + col] = q;
		}
	}
	// Relabel by smallest member so labels are 1..k in order of appearance.
	std::vector<int> label(4, 0);
	int next = 0;
	for (int& a : p.assignment) {
		if (label[a] == 0) label[a] = ++next;
		a = label[a];
	}
	p.n_clusters = next;
	return p;
}

SyntheticTruth make_truth(const SyntheticTruthOptions& opts) {
	if (opts.nx < 1 || opts.ny < 1) {
		throw ConfigError("synthetic grid needs nx, ny >= 1");
	}
	SyntheticTruth out;
	auto& b = out.bundle;
	auto meta = std::make_shared<const GridMeta>(
	    make_lattice(opts.nx, opts.ny, opts.lat0, opts.lon0, opts.spacing));
	b.meta = meta;
	const auto n = static_cast<int>(meta->size());

	b.seasonal.n_harmonics = 5;
	for (int i = 0; i < n; ++i) {
		Eigen::VectorXd m = Eigen::VectorXd::Zero(11);
		Eigen::VectorXd s = Eigen::VectorXd::Zero(11);
		m[0] = opts.mean_level + 0.1 * (i % 3);
		m[1] = 1.0 + 0.05 * (i % 4);
		m[2] = -0.6;
		m[4] = 0.3;
		s[0] = opts.sd_level;
		s[2] = 0.2 * opts.sd_level;
		s[3] = 0.1 * opts.sd_level;
		b.seasonal.mean_coefs.push_back(m);
		b.seasonal.sd_coefs.push_back(s);
	}

	b.a2 = opts.a2_diagonal * Eigen::MatrixXd::Identity(n, n);
	b.a1 = scale_to_radius(stencil_pattern(*meta), b.a2, opts.spectral_radius);

	if (opts.skewed) {
		b.partition = quadrant_partition(opts.nx, opts.ny);
	} else {
		b.partition.n_clusters = 1;
		b.partition.assignment.assign(n, 1);
	}
	for (int c = 1; c <= b.partition.n_clusters; ++c) {
		RegionSkewT r;
		r.id = c;
		r.members = b.partition.members(c);
		const auto d = static_cast<Eigen::Index>(r.members.size());
		r.residual_sd = Eigen::VectorXd::Ones(d);
		r.matern_kappa = 1.5;
		if (opts.skewed) {
			r.matern_phi = opts.matern_phi_km;
			const Eigen::MatrixXd corr =
			    matern_matrix(distance_matrix(*meta, r.members), opts.matern_phi_km, 1.5);
			const double dc = opts.region_delta.at(
			    static_cast<std::size_t>(c - 1) % opts.region_delta.size());
			r.dp = dp_from_delta(Eigen::VectorXd::Zero(d), corr, Eigen::VectorXd::Constant(d, dc),
			                     opts.nu);
		} else {
			r.matern_phi = 0.0;
			r.dp.xi = Eigen::VectorXd::Zero(d);
			r.dp.omega = Eigen::MatrixXd::Identity(d, d);
			r.dp.alpha = Eigen::VectorXd::Zero(d);
			r.dp.nu = 1e6;
		}
		b.regions.push_back(std::move(r));
	}
	b.family = opts.family;
	b.master_seed = opts.seed;

	out.var.a1 = b.a1;
	out.var.a2 = b.a2;
	out.var.restrictions = build_restrictions(*meta, StencilScheme::Stencil);
	out.var.estimator = "truth";
	out.var.scheme = scheme_name(StencilScheme::Stencil);
	const auto stab = check_stability(b.a1, b.a2);
	out.var.max_modulus = stab.max_modulus;
	out.var.stable = stab.stable;
	b.validate();
	return out;
}

}  // namespace windgen
