#include "windgen/seasonal.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "windgen/errors.hpp"

namespace windgen {

Eigen::VectorXd harmonic_basis(int day_of_year, int n_harmonics) {
	Eigen::VectorXd row(2 * n_harmonics + 1);
	row[0] = 1.0;
	const double w = 2.0 * std::numbers::pi * day_of_year / days_per_year;
	for (int k = 1; k <= n_harmonics; ++k) {
		row[2 * k - 1] = std::sin(k * w);
		row[2 * k] = std::cos(k * w);
	}
	return row;
}

namespace {

Eigen::MatrixXd design_matrix(int n_harmonics) {
	Eigen::MatrixXd x(days_per_year, 2 * n_harmonics + 1);
	for (int d = 1; d <= days_per_year; ++d) {
		x.row(d - 1) = harmonic_basis(d, n_harmonics).transpose();
	}
	return x;
}

}  // namespace

Eigen::VectorXd fit_harmonics(std::span<const double> day_targets, int n_harmonics) {
	if (day_targets.size() != static_cast<std::size_t>(days_per_year)) {
		throw DataError("harmonic fit needs exactly 365 day-of-year targets");
	}
	if (n_harmonics < 0 || 2 * n_harmonics + 1 > days_per_year) {
		throw ConfigError("invalid number of harmonics: " + std::to_string(n_harmonics));
	}
	const Eigen::MatrixXd x = design_matrix(n_harmonics);
	Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
	if (qr.rank() < x.cols()) {
		throw NumericalError("singular harmonic design matrix");
	}
	const Eigen::Map<const Eigen::VectorXd> y(day_targets.data(), days_per_year);
	return qr.solve(y);
}

double SeasonalModel::mean(int point, int day_of_year) const {
	return harmonic_basis(day_of_year, n_harmonics).dot(mean_coefs.at(point));
}

double SeasonalModel::sd(int point, int day_of_year) const {
	return harmonic_basis(day_of_year, n_harmonics).dot(sd_coefs.at(point));
}

SeasonalModel SeasonalModel::identity(int n_points, int n_harmonics) {
	SeasonalModel m;
	m.n_harmonics = n_harmonics;
	const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2 * n_harmonics + 1);
	Eigen::VectorXd one = zero;
	one[0] = 1.0;
	m.mean_coefs.assign(static_cast<std::size_t>(n_points), zero);
	m.sd_coefs.assign(static_cast<std::size_t>(n_points), one);
	return m;
}

SeasonalModel fit_seasonal(const EnsembleSeries& series, const SeasonalOptions& opts) {
	if (series.scale() != Scale::Raw) {
		throw ConfigError("seasonal fit expects a raw (m/s) series");
	}
	if (series.n_realizations() < 1 || series.calendar().n_years < 1) {
		throw DataError("seasonal fit needs at least one realization and one year");
	}
	const int n = series.n_points();
	const int n_days = series.n_days();
	const double per_day = static_cast<double>(series.n_realizations()) *
	                       series.calendar().n_years;
	const Eigen::MatrixXd x = design_matrix(opts.n_harmonics);

	SeasonalModel model;
	model.n_harmonics = opts.n_harmonics;
	model.mean_coefs.resize(static_cast<std::size_t>(n));
	model.sd_coefs.resize(static_cast<std::size_t>(n));
	std::string rejected;

	std::array<double, days_per_year> target{};
	std::array<double, days_per_year> second{};
	for (int i = 0; i < n; ++i) {
		target.fill(0.0);
		for (int r = 0; r < series.n_realizations(); ++r) {
			for (int t = 0; t < n_days; ++t) {
				target[t % days_per_year] += series.at(r, t, i);
			}
		}
		for (double& v : target) v /= per_day;
		model.mean_coefs[i] = fit_harmonics(target, opts.n_harmonics);
		const Eigen::VectorXd mu = x * model.mean_coefs[i];

		// Day-of-year SD of the residuals about their own daily mean.
		target.fill(0.0);
		second.fill(0.0);
		double total = 0.0;
		double total_sq = 0.0;
		for (int r = 0; r < series.n_realizations(); ++r) {
			for (int t = 0; t < n_days; ++t) {
				const int d = t % days_per_year;
				const double e = series.at(r, t, i) - mu[d];
				target[d] += e;
				second[d] += e * e;
				total += e;
				total_sq += e * e;
			}
		}
		const double count = per_day * days_per_year;
		const double overall_var = total_sq / count - (total / count) * (total / count);
		for (int d = 0; d < days_per_year; ++d) {
			const double m = target[d] / per_day;
			target[d] = std::sqrt(std::max(0.0, second[d] / per_day - m * m));
		}
		model.sd_coefs[i] = fit_harmonics(target, opts.n_harmonics);
		const Eigen::VectorXd sigma = x * model.sd_coefs[i];
		const double floor = opts.sd_floor * std::sqrt(std::max(overall_var, 0.0));
		if (!(overall_var > 0.0) || sigma.minCoeff() < floor) {
			if (!rejected.empty()) rejected += ", ";
			rejected += std::to_string(i);
		}
	}
	if (!rejected.empty()) {
		throw NumericalError("fitted SD cycle falls below the floor at gridpoint(s) " + rejected);
	}
	return model;
}

namespace {

struct DayTables {
	Eigen::MatrixXd mu;     // 365 x N
	Eigen::MatrixXd sigma;  // 365 x N
};

DayTables tabulate(const SeasonalModel& model, int n_points) {
	if (model.n_points() != n_points) {
		throw DataError("seasonal model has " + std::to_string(model.n_points()) +
		                " points, series has " + std::to_string(n_points));
	}
	const Eigen::MatrixXd x = design_matrix(model.n_harmonics);
	DayTables tab{Eigen::MatrixXd(days_per_year, n_points),
	              Eigen::MatrixXd(days_per_year, n_points)};
	for (int i = 0; i < n_points; ++i) {
		tab.mu.col(i) = x * model.mean_coefs[i];
		tab.sigma.col(i) = x * model.sd_coefs[i];
	}
	return tab;
}

}  // namespace

EnsembleSeries standardize(const EnsembleSeries& series, const SeasonalModel& model) {
	if (series.scale() != Scale::Raw) {
		throw ConfigError("series is already standardized");
	}
	const auto tab = tabulate(model, series.n_points());
	EnsembleSeries out = series;
	out.set_scale(Scale::Standardized);
	for (int r = 0; r < series.n_realizations(); ++r) {
		for (int t = 0; t < series.n_days(); ++t) {
			const int d = t % days_per_year;
			auto row = out.day(r, t);
			for (int i = 0; i < series.n_points(); ++i) {
				row[i] = (row[i] - tab.mu(d, i)) / tab.sigma(d, i);
			}
		}
	}
	return out;
}

EnsembleSeries destandardize(const EnsembleSeries& series, const SeasonalModel& model) {
	if (series.scale() != Scale::Standardized) {
		throw ConfigError("series is not standardized");
	}
	const auto tab = tabulate(model, series.n_points());
	EnsembleSeries out = series;
	out.set_scale(Scale::Raw);
	for (int r = 0; r < series.n_realizations(); ++r) {
		for (int t = 0; t < series.n_days(); ++t) {
			const int d = t % days_per_year;
			auto row = out.day(r, t);
			for (int i = 0; i < series.n_points(); ++i) {
				row[i] = tab.mu(d, i) + tab.sigma(d, i) * row[i];
			}
		}
	}
	return out;
}

}  // namespace windgen
