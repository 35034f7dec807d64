#include "windgen/var_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "windgen/errors.hpp"
#include "windgen/stats.hpp"

namespace windgen {

std::string entry_name(const RestrictionEntry& e) {
	return std::string(e.lag == Lag::A1 ? "A1" : "A2") + "(" + std::to_string(e.row) + "," +
	       std::to_string(e.col) + ")";
}

StencilScheme parse_scheme(const std::string& name) {
	if (name == "stencil") return StencilScheme::Stencil;
	if (name == "diagonal") return StencilScheme::Diagonal;
	if (name == "dense") return StencilScheme::Dense;
	throw ConfigError("unknown stencil scheme '" + name + "'");
}

std::string scheme_name(StencilScheme s) {
	switch (s) {
	case StencilScheme::Stencil: return "stencil";
	case StencilScheme::Diagonal: return "diagonal";
	case StencilScheme::Dense: return "dense";
	}
	return "?";
}

Estimator parse_estimator(const std::string& name) {
	if (name == "ols" || name == "OLS") return Estimator::OLS;
	if (name == "gls" || name == "GLS") return Estimator::GLS;
	throw ConfigError("unknown estimator '" + name + "'");
}

std::string estimator_name(Estimator e) { return e == Estimator::OLS ? "OLS" : "GLS"; }

std::vector<std::vector<std::size_t>> Restrictions::by_row() const {
	std::vector<std::vector<std::size_t>> rows(static_cast<std::size_t>(n_points));
	for (std::size_t k = 0; k < entries.size(); ++k) {
		rows[entries[k].row].push_back(k);
	}
	return rows;
}

bool Restrictions::allows(Lag lag, int row, int col) const {
	return std::find(entries.begin(), entries.end(), RestrictionEntry{lag, row, col}) !=
	       entries.end();
}

Restrictions build_restrictions(const GridMeta& meta, StencilScheme scheme) {
	Restrictions r;
	r.n_points = static_cast<int>(meta.size());
	for (int i = 0; i < r.n_points; ++i) {
		std::vector<int> cols;
		switch (scheme) {
		case StencilScheme::Stencil:
			cols.push_back(i);
			for (const auto& nb : meta.neighbors[i]) cols.push_back(nb.id);
			break;
		case StencilScheme::Diagonal:
			cols.push_back(i);
			break;
		case StencilScheme::Dense:
			cols.resize(static_cast<std::size_t>(r.n_points));
			std::iota(cols.begin(), cols.end(), 0);
			break;
		}
		std::sort(cols.begin(), cols.end());
		for (int j : cols) r.entries.push_back({Lag::A1, i, j});
		if (scheme == StencilScheme::Dense) {
			for (int j : cols) r.entries.push_back({Lag::A2, i, j});
		} else {
			r.entries.push_back({Lag::A2, i, i});
		}
	}
	return r;
}

Eigen::MatrixXd companion_matrix(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2) {
	const Eigen::Index n = a1.rows();
	Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * n, 2 * n);
	c.topLeftCorner(n, n) = a1;
	c.topRightCorner(n, n) = a2;
	c.bottomLeftCorner(n, n).setIdentity();
	return c;
}

StabilityReport check_stability(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2) {
	if (a1.rows() == 0) {
		return {true, 0.0};
	}
	Eigen::EigenSolver<Eigen::MatrixXd> es(companion_matrix(a1, a2), false);
	if (es.info() != Eigen::Success) {
		throw NumericalError("eigenvalue computation of the companion matrix failed");
	}
	const double m = es.eigenvalues().cwiseAbs().maxCoeff();
	return {m < 1.0, m};
}

namespace {

using ConstDays = Eigen::Map<const Eigen::MatrixXd>;

/// Realization r as an N x T matrix, one column per day.
ConstDays days_of(const EnsembleSeries& s, int r) {
	return ConstDays(s.day(r, 0).data(), s.n_points(), s.n_days());
}

int regressor_index(const RestrictionEntry& e, int n) {
	return e.lag == Lag::A1 ? e.col : n + e.col;
}

std::vector<int> regressor_indices(const Restrictions& restr,
                                   const std::vector<std::size_t>& row_entries) {
	std::vector<int> idx;
	idx.reserve(row_entries.size());
	for (auto k : row_entries) idx.push_back(regressor_index(restr.entries[k], restr.n_points));
	return idx;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
	Eigen::MatrixXd out(rows.size(), cols.size());
	for (std::size_t a = 0; a < rows.size(); ++a) {
		for (std::size_t b = 0; b < cols.size(); ++b) {
			out(a, b) = m(rows[a], cols[b]);
		}
	}
	return out;
}

/// Solves a symmetric normal system, naming rank-deficient columns on failure.
Eigen::VectorXd solve_normal(const Eigen::MatrixXd& h, const Eigen::VectorXd& rhs,
                             const std::vector<RestrictionEntry>& names) {
	Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(h);
	qr.setThreshold(1e-11);
	if (qr.rank() < h.cols()) {
		std::string cols;
		const auto& perm = qr.colsPermutation().indices();
		for (Eigen::Index k = qr.rank(); k < h.cols(); ++k) {
			if (!cols.empty()) cols += ", ";
			cols += entry_name(names[static_cast<std::size_t>(perm[k])]);
		}
		throw NumericalError("singular normal matrix; deficient columns: " + cols);
	}
	Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
	if (ldlt.info() == Eigen::Success) {
		return ldlt.solve(rhs);
	}
	return qr.solve(rhs);
}

std::vector<RestrictionEntry> entries_of(const Restrictions& restr,
                                         const std::vector<std::size_t>& ks) {
	std::vector<RestrictionEntry> out;
	for (auto k : ks) out.push_back(restr.entries[k]);
	return out;
}

void scatter(const Restrictions& restr, const Eigen::VectorXd& gamma, Eigen::MatrixXd& a1,
             Eigen::MatrixXd& a2) {
	const int n = restr.n_points;
	a1 = Eigen::MatrixXd::Zero(n, n);
	a2 = Eigen::MatrixXd::Zero(n, n);
	for (std::size_t k = 0; k < restr.entries.size(); ++k) {
		const auto& e = restr.entries[k];
		(e.lag == Lag::A1 ? a1 : a2)(e.row, e.col) = gamma[static_cast<Eigen::Index>(k)];
	}
}

}  // namespace

LaggedMoments lagged_moments(const EnsembleSeries& series) {
	const int n = series.n_points();
	const int len = series.n_days() - 2;
	LaggedMoments m;
	m.zz = Eigen::MatrixXd::Zero(2 * n, 2 * n);
	m.zw = Eigen::MatrixXd::Zero(2 * n, n);
	if (len <= 0) {
		return m;
	}
	for (int r = 0; r < series.n_realizations(); ++r) {
		const auto w = days_of(series, r);
		const auto lag1 = w.middleCols(1, len);
		const auto lag2 = w.middleCols(0, len);
		const auto now = w.middleCols(2, len);
		m.zz.topLeftCorner(n, n).noalias() += lag1 * lag1.transpose();
		m.zz.topRightCorner(n, n).noalias() += lag1 * lag2.transpose();
		m.zz.bottomRightCorner(n, n).noalias() += lag2 * lag2.transpose();
		m.zw.topRows(n).noalias() += lag1 * now.transpose();
		m.zw.bottomRows(n).noalias() += lag2 * now.transpose();
		m.n_obs += len;
	}
	m.zz.bottomLeftCorner(n, n) = m.zz.topRightCorner(n, n).transpose();
	return m;
}

Eigen::VectorXd restricted_ols(const LaggedMoments& moments, const Restrictions& restr) {
	Eigen::VectorXd gamma(static_cast<Eigen::Index>(restr.size()));
	const auto rows = restr.by_row();
	for (int i = 0; i < restr.n_points; ++i) {
		const auto idx = regressor_indices(restr, rows[i]);
		if (idx.empty()) {
			continue;
		}
		const Eigen::MatrixXd h = gather(moments.zz, idx, idx);
		Eigen::VectorXd rhs(static_cast<Eigen::Index>(idx.size()));
		for (std::size_t a = 0; a < idx.size(); ++a) rhs[a] = moments.zw(idx[a], i);
		const Eigen::VectorXd g = solve_normal(h, rhs, entries_of(restr, rows[i]));
		for (std::size_t a = 0; a < idx.size(); ++a) gamma[rows[i][a]] = g[a];
	}
	return gamma;
}

namespace {

Eigen::MatrixXd gls_normal_matrix(const LaggedMoments& moments, const Restrictions& restr,
                                  const Eigen::MatrixXd& sigma_inv) {
	const auto m = static_cast<Eigen::Index>(restr.size());
	const int n = restr.n_points;
	Eigen::MatrixXd h(m, m);
	for (Eigen::Index a = 0; a < m; ++a) {
		const auto& ea = restr.entries[a];
		const int ka = regressor_index(ea, n);
		for (Eigen::Index b = a; b < m; ++b) {
			const auto& eb = restr.entries[b];
			h(a, b) = moments.zz(ka, regressor_index(eb, n)) * sigma_inv(ea.row, eb.row);
			h(b, a) = h(a, b);
		}
	}
	return h;
}

}  // namespace

Eigen::VectorXd restricted_gls(const LaggedMoments& moments, const Restrictions& restr,
                               const Eigen::MatrixXd& sigma_inv) {
	const int n = restr.n_points;
	const Eigen::MatrixXd h = gls_normal_matrix(moments, restr, sigma_inv);
	const Eigen::MatrixXd zws = moments.zw * sigma_inv;
	Eigen::VectorXd rhs(static_cast<Eigen::Index>(restr.size()));
	for (std::size_t a = 0; a < restr.size(); ++a) {
		const auto& e = restr.entries[a];
		rhs[static_cast<Eigen::Index>(a)] = zws(regressor_index(e, n), e.row);
	}
	return solve_normal(h, rhs, restr.entries);
}

Eigen::MatrixXd var_residuals(const EnsembleSeries& series, const Eigen::MatrixXd& a1,
                              const Eigen::MatrixXd& a2) {
	const int n = series.n_points();
	const int len = std::max(series.n_days() - 2, 0);
	Eigen::MatrixXd out(static_cast<Eigen::Index>(series.n_realizations()) * len, n);
	for (int r = 0; r < series.n_realizations(); ++r) {
		const auto w = days_of(series, r);
		out.middleRows(static_cast<Eigen::Index>(r) * len, len) =
		    (w.middleCols(2, len) - a1 * w.middleCols(1, len) - a2 * w.middleCols(0, len))
		        .transpose();
	}
	return out;
}

std::vector<bool> benjamini_hochberg(std::span<const double> p_values, double level) {
	const std::size_t m = p_values.size();
	std::vector<std::size_t> order(m);
	std::iota(order.begin(), order.end(), 0);
	std::sort(order.begin(), order.end(),
	          [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
	std::size_t cutoff = 0;
	for (std::size_t k = 0; k < m; ++k) {
		if (p_values[order[k]] <= level * static_cast<double>(k + 1) / static_cast<double>(m)) {
			cutoff = k + 1;
		}
	}
	std::vector<bool> out(m, false);
	for (std::size_t k = 0; k < cutoff; ++k) out[order[k]] = true;
	return out;
}

VarModel fit_var(const EnsembleSeries& standardized, const Restrictions& restr,
                 Estimator estimator, double fdr_level) {
	if (standardized.scale() != Scale::Standardized) {
		throw ConfigError("VAR fit expects a standardized series");
	}
	if (restr.n_points != standardized.n_points()) {
		throw DataError("restrictions and series disagree on the number of points");
	}
	for (double v : standardized.values()) {
		if (!std::isfinite(v)) {
			throw DataError("non-finite value in VAR input");
		}
	}
	const int n = restr.n_points;
	const auto min_days = 3 + static_cast<int>((restr.size() + n - 1) / std::max(n, 1));
	if (standardized.n_days() < min_days || standardized.n_realizations() < 1) {
		throw DataError("series too short for the VAR fit: need at least " +
		                std::to_string(min_days) + " days");
	}

	VarModel model;
	model.restrictions = restr;
	model.estimator = estimator;
	model.n_members = standardized.n_realizations();

	const LaggedMoments moments = lagged_moments(standardized);
	Eigen::VectorXd gamma = restricted_ols(moments, restr);
	scatter(restr, gamma, model.a1, model.a2);
	model.residuals = var_residuals(standardized, model.a1, model.a2);

	Eigen::MatrixXd gls_cov;
	if (estimator == Estimator::GLS) {
		// One refinement step with the OLS residual covariance.
		const Eigen::MatrixXd sigma = stats::covariance(model.residuals);
		Eigen::LLT<Eigen::MatrixXd> llt(sigma);
		if (llt.info() != Eigen::Success) {
			throw NumericalError("OLS residual covariance is not positive definite");
		}
		const Eigen::MatrixXd sigma_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
		gamma = restricted_gls(moments, restr, sigma_inv);
		scatter(restr, gamma, model.a1, model.a2);
		model.residuals = var_residuals(standardized, model.a1, model.a2);
		gls_cov = gls_normal_matrix(moments, restr, sigma_inv)
		              .ldlt()
		              .solve(Eigen::MatrixXd::Identity(gamma.size(), gamma.size()));
	}

	const auto stab = check_stability(model.a1, model.a2);
	model.stable = stab.stable;
	model.max_modulus = stab.max_modulus;

	// Significance report; it never feeds back into the estimates.
	std::vector<double> se(restr.size(), 0.0);
	if (estimator == Estimator::GLS) {
		for (std::size_t k = 0; k < se.size(); ++k) {
			se[k] = std::sqrt(std::max(gls_cov(k, k), 0.0));
		}
	} else {
		const auto rows = restr.by_row();
		for (int i = 0; i < n; ++i) {
			const auto idx = regressor_indices(restr, rows[i]);
			if (idx.empty()) continue;
			const double dof = static_cast<double>(moments.n_obs) - static_cast<double>(idx.size());
			const double s2 = model.residuals.col(i).squaredNorm() / std::max(dof, 1.0);
			const Eigen::MatrixXd inv = gather(moments.zz, idx, idx)
			                                .ldlt()
			                                .solve(Eigen::MatrixXd::Identity(idx.size(), idx.size()));
			for (std::size_t a = 0; a < idx.size(); ++a) {
				se[rows[i][a]] = std::sqrt(std::max(s2 * inv(a, a), 0.0));
			}
		}
	}
	std::vector<double> p(restr.size(), 1.0);
	model.significance.resize(restr.size());
	for (std::size_t k = 0; k < restr.size(); ++k) {
		auto& c = model.significance[k];
		c.entry = restr.entries[k];
		c.value = gamma[static_cast<Eigen::Index>(k)];
		c.std_error = se[k];
		c.t_stat = se[k] > 0.0 ? c.value / se[k] : 0.0;
		c.p_value = std::erfc(std::abs(c.t_stat) / std::sqrt(2.0));
		p[k] = c.p_value;
	}
	const auto reject = benjamini_hochberg(p, fdr_level);
	for (std::size_t k = 0; k < restr.size(); ++k) model.significance[k].significant = reject[k];
	return model;
}

ResidualMoments residual_moments(const Eigen::MatrixXd& residuals) {
	return {stats::column_skewness(residuals), stats::column_excess_kurtosis(residuals),
	        stats::correlation(residuals)};
}

}  // namespace windgen
